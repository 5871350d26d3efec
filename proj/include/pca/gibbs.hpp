#pragma once

#include <map>
#include <set>
#include <vector>

#include "pca/distribution.hpp"
#include "pca/dynamics.hpp"

namespace pca {

/// Largest box for which full 2^|Lambda| tables are built.
inline constexpr std::size_t kExactCeiling = 20;

inline void require_exact_size(const Box& box) {
  if (box.size() > kExactCeiling)
    throw Error("box " + box.str() + " has " + std::to_string(box.size()) + " sites, above the exact ceiling of " +
                std::to_string(kExactCeiling));
}

/// Shift-invariant potential with a singleton term -beta h sigma_i and, on
/// U_i = {j : k(i - j) != 0}, the term -log cosh(beta sum_j k(i-j) sigma_j + beta h).
/// All other Phi_A vanish.
class Potential {
 public:
  explicit Potential(PcaParams params) : params_(std::move(params)) { params_.validate(); }

  const PcaParams& params() const { return params_; }

  double singleton(Spin s) const { return -params_.beta * params_.h * s; }

  std::vector<Site> neighborhood(const Site& i) const {
    std::vector<Site> u;
    for (const auto& [o, w] : params_.kernel.support()) u.push_back(i - o);
    return u;
  }

  double neighborhood_term(const Site& i, const ExtendedConfig& ext) const {
    return -log_cosh(params_.beta * (field_sum(i, ext, params_.kernel) + params_.h));
  }

 private:
  PcaParams params_;
};

/// H_Lambda(sigma) = sum over A meeting Lambda of Phi_A(sigma~).
inline double hamiltonian(const SpinConfig& config, const BoundaryCondition& bc, const Potential& phi) {
  const Box& box = config.box();
  const ExtendedConfig ext(config, bc);
  double h = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i) h += phi.singleton(config[i]);
  if (bc.is_periodic()) {
    for (std::size_t i = 0; i < box.size(); ++i) h += phi.neighborhood_term(box.site(i), ext);
    return h;
  }
  // Centres i whose U_i meets Lambda.
  std::set<Site> centres;
  for (std::size_t j = 0; j < box.size(); ++j) {
    const Site sj = box.site(j);
    for (const auto& [o, w] : phi.params().kernel.support()) centres.insert(sj + o);
  }
  for (const Site& i : centres) h += phi.neighborhood_term(i, ext);
  return h;
}

namespace detail {

inline std::vector<double> exterior_sums(const Box& box, const BoundaryCondition& bc, const CouplingKernel& kernel) {
  std::vector<double> out(box.size(), 0.0);
  for (std::size_t i = 0; i < box.size(); ++i) {
    const Site si = box.site(i);
    for (const auto& [o, w] : kernel.support()) {
      const Site j = si - o;
      if (box.contains(j)) continue;
      auto tau = bc.exterior(j);
      if (!tau) throw Error("missing boundary spin at " + j.str());
      out[i] += w * *tau;
    }
  }
  return out;
}

inline double stationary_log_weight(const SpinConfig& config, const BoundaryCondition& bc, const PcaParams& params,
                                    const std::vector<double>& exterior) {
  const Box& box = config.box();
  const ExtendedConfig ext(config, bc);
  const double b = params.beta;
  double lw = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i) {
    const double s = config[i];
    lw += b * params.h * s + log_cosh(b * local_field(box.site(i), ext, params)) + b * s * exterior[i];
  }
  return lw;
}

}  // namespace detail

/// log of prod_{i in Lambda} e^{beta h sigma_i} cosh[beta m_i] e^{beta sigma_i sum_{j notin Lambda} k(i-j) tau_j}.
inline double stationary_log_weight(const SpinConfig& config, const BoundaryCondition& bc, const PcaParams& params) {
  if (bc.is_periodic()) throw Error("stationary_log_weight needs a fixed boundary condition");
  return detail::stationary_log_weight(config, bc, params, detail::exterior_sums(config.box(), bc, params.kernel));
}

inline double stationary_weight(const SpinConfig& config, const BoundaryCondition& bc, const PcaParams& params) {
  return std::exp(stationary_log_weight(config, bc, params));
}

/// log of prod_{i in Lambda} cosh[beta m_i] e^{beta h sigma_i}, sigma~ periodic.
inline double periodic_stationary_log_weight(const SpinConfig& config, const PcaParams& params) {
  const auto per = BoundaryCondition::periodic();
  const ExtendedConfig ext(config, per);
  const Box& box = config.box();
  double lw = 0.0;
  for (std::size_t i = 0; i < box.size(); ++i)
    lw += params.beta * params.h * config[i] + log_cosh(params.beta * local_field(box.site(i), ext, params));
  return lw;
}

inline double periodic_stationary_weight(const SpinConfig& config, const PcaParams& params) {
  return std::exp(periodic_stationary_log_weight(config, params));
}

using WeightTable = Distribution;

/// Closed-form stationary law of P_Lambda^tau (fixed) or P_Lambda^per (periodic).
inline WeightTable stationary_table(const Box& box, const BoundaryCondition& bc, const PcaParams& params) {
  require_exact_size(box);
  const std::size_t n = std::size_t{1} << box.size();
  std::vector<double> logw(n);
  if (bc.is_periodic()) {
    for (std::size_t c = 0; c < n; ++c) logw[c] = periodic_stationary_log_weight(SpinConfig::decode(box, c), params);
  } else {
    const auto ext = detail::exterior_sums(box, bc, params.kernel);
    for (std::size_t c = 0; c < n; ++c)
      logw[c] = detail::stationary_log_weight(SpinConfig::decode(box, c), bc, params, ext);
  }
  return normalize_log_weights(box, logw);
}

/// Finite-volume Gibbs law exp(-H_Lambda^tau) / Z built from the potential.
inline WeightTable gibbs_table(const Box& box, const BoundaryCondition& bc, const PcaParams& params) {
  require_exact_size(box);
  const Potential phi(params);
  const std::size_t n = std::size_t{1} << box.size();
  std::vector<double> logw(n);
  for (std::size_t c = 0; c < n; ++c) logw[c] = -hamiltonian(SpinConfig::decode(box, c), bc, phi);
  return normalize_log_weights(box, logw);
}

/// Product form prod_{i : dist(i, Lambda) <= R} cosh[beta m_i] e^{beta h sigma~_i};
/// on a torus the product runs over Lambda.
inline WeightTable gibbs_product_table(const Box& box, const BoundaryCondition& bc, const PcaParams& params,
                                       DistanceNorm norm = DistanceNorm::sup) {
  require_exact_size(box);
  const int range = params.kernel.range(norm);
  const std::vector<Site> sites = bc.is_periodic() ? box.sites() : box.closure(range, norm);
  const std::size_t n = std::size_t{1} << box.size();
  std::vector<double> logw(n);
  for (std::size_t c = 0; c < n; ++c) {
    const SpinConfig config = SpinConfig::decode(box, c);
    const ExtendedConfig ext(config, bc);
    double lw = 0.0;
    for (const Site& i : sites)
      lw += log_cosh(params.beta * (field_sum(i, ext, params.kernel) + params.h)) + params.beta * params.h * ext(i);
    logw[c] = lw;
  }
  return normalize_log_weights(box, logw);
}

enum class TransformCase { odd_sublattice = 2, odd_rows = 3 };

/// Kernel sign change k -> k* paired with the involution T on configurations
/// that maps Gibbs specifications of k onto those of k* (h = 0, planar range-1 kernels).
class ModelTransform {
 public:
  ModelTransform(TransformCase which, CouplingKernel original) : which_(which) {
    if (original.dim() != 2) throw Error("model transforms need a planar kernel");
    for (const auto& [o, w] : original.support())
      if (std::abs(o[0]) + std::abs(o[1]) > 1) throw Error("model transforms need a range-1 nearest-neighbour kernel");
    const double k0 = original.at({0, 0}), k1 = original.at({1, 0}), k2 = original.at({0, 1});
    kernel_ = which == TransformCase::odd_sublattice ? CouplingKernel::nearest_neighbour(-k0, k1, k2)
                                                     : CouplingKernel::nearest_neighbour(k0, k1, -k2);
  }

  TransformCase which() const { return which_; }
  const CouplingKernel& kernel() const { return kernel_; }

  bool flips(const Site& i) const {
    const int v = which_ == TransformCase::odd_sublattice ? i.coordinate_sum() : i[1];
    return v % 2 != 0;
  }

  Spin apply(const Site& i, Spin s) const { return flips(i) ? static_cast<Spin>(-s) : s; }

  SpinConfig apply(const SpinConfig& config) const {
    SpinConfig out = config;
    for (std::size_t k = 0; k < config.size(); ++k) out.mutable_spins()[k] = apply(config.box().site(k), config[k]);
    return out;
  }

  /// T tau, materialized on Cl_width(box); periodic stays periodic when T respects the wrap.
  BoundaryCondition apply(const BoundaryCondition& bc, const Box& box, int width) const {
    if (bc.is_periodic()) {
      const auto& s = box.sides();
      const bool ok = which_ == TransformCase::odd_sublattice ? (s[0] % 2 == 0 && s[1] % 2 == 0) : s[1] % 2 == 0;
      if (!ok) throw Error("transform is not compatible with the periodic box " + box.str());
      return bc;
    }
    return BoundaryCondition::fixed_from(box, width, [&](const Site& j) -> Spin {
      auto tau = bc.exterior(j);
      if (!tau) throw Error("missing boundary spin at " + j.str());
      return apply(j, *tau);
    });
  }

 private:
  TransformCase which_;
  CouplingKernel kernel_;
};

inline ModelTransform transform_model(int case_tag, const CouplingKernel& kernel) {
  if (case_tag == 2) return ModelTransform(TransformCase::odd_sublattice, kernel);
  if (case_tag == 3) return ModelTransform(TransformCase::odd_rows, kernel);
  throw Error("unsupported transform case " + std::to_string(case_tag) + " (expected 2 or 3)");
}

}  // namespace pca
