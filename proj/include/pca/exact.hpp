#pragma once

#include <cmath>
#include <vector>

#include "pca/gibbs.hpp"

namespace pca {

/// Row-stochastic matrix over canonical configuration indices; at(from, to).
class TransitionMatrix {
 public:
  TransitionMatrix() = default;
  TransitionMatrix(Box box, std::vector<double> data) : box_(std::move(box)), data_(std::move(data)) {
    n_ = std::size_t{1} << box_.size();
    if (data_.size() != n_ * n_) throw Error("transition matrix has the wrong number of entries");
  }

  const Box& box() const { return box_; }
  std::size_t states() const { return n_; }
  double at(std::size_t from, std::size_t to) const { return data_[from * n_ + to]; }
  double& at(std::size_t from, std::size_t to) { return data_[from * n_ + to]; }
  const double* row(std::size_t from) const { return data_.data() + from * n_; }

  double max_row_sum_error() const {
    double e = 0.0;
    for (std::size_t a = 0; a < n_; ++a) {
      double s = 0.0;
      for (std::size_t b = 0; b < n_; ++b) s += at(a, b);
      e = std::max(e, std::fabs(s - 1.0));
    }
    return e;
  }

 private:
  Box box_;
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// Materializes P_Lambda(sigma | eta) for every pair of configurations.
inline TransitionMatrix build_matrix(const TransitionContext& ctx, unsigned workers = 1) {
  const Box& box = ctx.box();
  require_exact_size(box);
  const std::size_t sites = box.size();
  const std::size_t n = std::size_t{1} << sites;
  std::vector<double> data(n * n);
  parallel_for(n, workers, [&](std::size_t from) {
    const SpinConfig prev = SpinConfig::decode(box, from);
    double* row = data.data() + from * n;
    // row[sigma] = prod_i p_i(sigma_i), grown one site (bit) at a time.
    row[0] = 1.0;
    for (std::size_t i = 0; i < sites; ++i) {
      const double x = ctx.scaled_field(i, prev.spins());
      const double up = spin_prob(1, x), down = spin_prob(-1, x);
      const std::size_t half = std::size_t{1} << i;
      for (std::size_t c = 0; c < half; ++c) {
        row[c | half] = row[c] * up;
        row[c] *= down;
      }
    }
  });
  return TransitionMatrix(box, std::move(data));
}

/// (P nu)(sigma) = sum_eta nu(eta) P(sigma | eta).
inline Distribution push_forward(const Distribution& nu, const TransitionMatrix& P) {
  if (nu.states() != P.states()) throw Error("distribution and matrix sizes differ");
  std::vector<double> out(P.states(), 0.0);
  for (std::size_t a = 0; a < P.states(); ++a) {
    const double w = nu[a];
    if (w == 0.0) continue;
    const double* r = P.row(a);
    for (std::size_t b = 0; b < P.states(); ++b) out[b] += w * r[b];
  }
  return Distribution(P.box(), std::move(out));
}

struct PowerIterationRule {
  double tv_tolerance = 1e-14;
  std::size_t max_iterations = 1'000'000;
};

/// Power iteration nu <- P nu from `start` until the TV change per step is at
/// most rule.tv_tolerance; throws if the iteration cap is hit.
inline Distribution stationary_distribution(const TransitionMatrix& P, const Distribution& start,
                                            PowerIterationRule rule = {}) {
  Distribution nu = start;
  for (std::size_t it = 0; it < rule.max_iterations; ++it) {
    Distribution next = push_forward(nu, P);
    const double change = total_variation(next, nu);
    nu = std::move(next);
    if (change <= rule.tv_tolerance) return nu;
  }
  throw Error("power iteration did not converge within " + std::to_string(rule.max_iterations) + " iterations");
}

inline Distribution stationary_distribution(const TransitionMatrix& P, PowerIterationRule rule = {}) {
  return stationary_distribution(P, Distribution::uniform(P.box()), rule);
}

/// max |P(sigma|eta) nu(eta) - P(eta|sigma) nu(sigma)|, relative to the largest joint entry.
inline double detailed_balance_residual(const TransitionMatrix& P, const Distribution& nu) {
  if (nu.states() != P.states()) throw Error("distribution and matrix sizes differ");
  if (!nu.strictly_positive()) throw Error("detailed balance needs a strictly positive distribution");
  double worst = 0.0, scale = 0.0;
  for (std::size_t a = 0; a < P.states(); ++a)
    for (std::size_t b = 0; b < P.states(); ++b) {
      const double fwd = P.at(a, b) * nu[a];
      scale = std::max(scale, fwd);
      if (b > a) worst = std::max(worst, std::fabs(fwd - P.at(b, a) * nu[b]));
    }
  return scale > 0.0 ? worst / scale : 0.0;
}

/// sum nu log(nu / mu), natural log, with 0 log 0 = 0.
inline double relative_entropy(const Distribution& nu, const Distribution& mu) {
  if (nu.states() != mu.states()) throw Error("distributions have different sizes");
  double h = 0.0;
  for (std::size_t k = 0; k < nu.states(); ++k) {
    if (nu[k] == 0.0) continue;
    if (mu[k] <= 0.0) throw Error("relative entropy is infinite: reference vanishes at index " + std::to_string(k));
    h += nu[k] * std::log(nu[k] / mu[k]);
  }
  return h;
}

/// Time reversal of P under nu: row sigma is P^_nu(eta | sigma) = P(sigma|eta) nu(eta) / (P nu)(sigma).
/// Rows of sigma with (P nu)(sigma) = 0 are left at zero.
inline TransitionMatrix backward_kernel(const TransitionMatrix& P, const Distribution& nu) {
  const Distribution pnu = push_forward(nu, P);
  std::vector<double> data(P.states() * P.states(), 0.0);
  const std::size_t n = P.states();
  for (std::size_t s = 0; s < n; ++s) {
    if (pnu[s] <= 0.0) continue;
    for (std::size_t e = 0; e < n; ++e) data[s * n + e] = P.at(e, s) * nu[e] / pnu[s];
  }
  return TransitionMatrix(P.box(), std::move(data));
}

struct EntropyProduction {
  double lhs = 0.0;  // h(nu|mu) - h(P nu|mu)
  double rhs = 0.0;  // sum_sigma (P nu)(sigma) KL(P^_nu(.|sigma) || P^_mu(.|sigma))
};

/// One-step entropy production toward a stationary law mu_stat, computed both ways.
inline EntropyProduction entropy_production(const Distribution& nu, const TransitionMatrix& P,
                                            const Distribution& mu_stat) {
  const Distribution pmu = push_forward(mu_stat, P);
  if (total_variation(pmu, mu_stat) > 1e-10) throw Error("reference distribution is not stationary for P");
  if (!mu_stat.strictly_positive()) throw Error("reference distribution must be strictly positive");
  const Distribution pnu = push_forward(nu, P);
  EntropyProduction out;
  out.lhs = relative_entropy(nu, mu_stat) - relative_entropy(pnu, mu_stat);
  const TransitionMatrix back_nu = backward_kernel(P, nu);
  const TransitionMatrix back_mu = backward_kernel(P, mu_stat);
  const std::size_t n = P.states();
  for (std::size_t s = 0; s < n; ++s) {
    if (pnu[s] == 0.0) continue;
    double kl = 0.0;
    for (std::size_t e = 0; e < n; ++e) {
      const double a = back_nu.at(s, e);
      if (a > 0.0) kl += a * std::log(a / back_mu.at(s, e));
    }
    out.rhs += pnu[s] * kl;
  }
  return out;
}

/// Integrated autocorrelation time of each state indicator for the chain started in nu:
/// tau_c = 1 + 2 sum_{t >= 1} (P^t(c, c) - nu_c) / (1 - nu_c). Equals 1 for independent draws.
inline std::vector<double> indicator_autocorrelation_times(const TransitionMatrix& P, const Distribution& nu,
                                                           std::size_t max_lag = 100000) {
  const std::size_t n = P.states();
  std::vector<double> tau(n, 1.0);
  for (std::size_t c = 0; c < n; ++c) {
    if (nu[c] >= 1.0) continue;
    Distribution d = Distribution::point_mass(nu.box, c);
    double sum = 0.0;
    for (std::size_t t = 1; t <= max_lag; ++t) {
      d = push_forward(d, P);
      const double term = (d[c] - nu[c]) / (1.0 - nu[c]);
      sum += term;
      if (total_variation(d, nu) < 1e-15) break;
    }
    tau[c] = 1.0 + 2.0 * sum;
  }
  return tau;
}

/// Canonical indices of the even / odd sublattice sites of a planar box.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> sublattice_indices(const Box& box) {
  const Sublattices parts = sublattices(box);
  std::pair<std::vector<std::size_t>, std::vector<std::size_t>> out;
  for (const Site& s : parts.even) out.first.push_back(*box.index_of(s));
  for (const Site& s : parts.odd) out.second.push_back(*box.index_of(s));
  return out;
}

namespace detail {

inline std::size_t mask_of(const std::vector<std::size_t>& idx) {
  std::size_t m = 0;
  for (std::size_t i : idx) m |= std::size_t{1} << i;
  return m;
}

}  // namespace detail

/// max_sigma |nu(sigma) - nu_e(sigma_e) nu_o(sigma_o)| for the even/odd sublattice marginals.
inline double factorization_defect(const Distribution& nu) {
  const auto [even, odd] = sublattice_indices(nu.box);
  const std::size_t me = detail::mask_of(even), mo = detail::mask_of(odd);
  std::vector<double> pe(nu.states(), 0.0), po(nu.states(), 0.0);
  for (std::size_t c = 0; c < nu.states(); ++c) {
    pe[c & me] += nu[c];
    po[c & mo] += nu[c];
  }
  double worst = 0.0;
  for (std::size_t c = 0; c < nu.states(); ++c) worst = std::max(worst, std::fabs(nu[c] - pe[c & me] * po[c & mo]));
  return worst;
}

struct IsingCorrespondence {
  double marginal_deviation = 0.0;    // max over sigma_e of |pi_e rho - even-site product law|
  double factorization_defect = 0.0;  // sublattice independence defect of nu_Lambda^tau
};

/// Anisotropic Ising law rho(sigma) ~ exp[beta sum over bonds {i, i+e_a} meeting Lambda of k(e_a) sigma~_i sigma~_{i+e_a}].
inline Distribution ising_table(const Box& box, const BoundaryCondition& bc, double beta, double k1, double k2) {
  require_exact_size(box);
  if (box.dim() != 2) throw Error("Ising correspondence needs a planar box");
  // Bonds listed once each by their lower end i, for i in Cl_1(Lambda).
  struct Bond {
    Site a, b;
    double k;
  };
  std::vector<Bond> bonds;
  for (const Site& i : box.closure(1))
    for (int axis = 0; axis < 2; ++axis) {
      const Site j = i + Site::unit(2, static_cast<std::size_t>(axis));
      const double k = axis == 0 ? k1 : k2;
      if (k != 0.0 && (box.contains(i) || box.contains(j))) bonds.push_back({i, j, k});
    }
  const std::size_t n = std::size_t{1} << box.size();
  std::vector<double> logw(n);
  for (std::size_t c = 0; c < n; ++c) {
    const SpinConfig config = SpinConfig::decode(box, c);
    const ExtendedConfig ext(config, bc);
    double e = 0.0;
    for (const Bond& bd : bonds) e += bd.k * ext(bd.a) * ext(bd.b);
    logw[c] = beta * e;
  }
  return normalize_log_weights(box, logw);
}

/// Checks, for k(0) = 0 and a fixed boundary, that the even-site marginal of the
/// anisotropic Ising law equals the product law
///   ~ prod_{i in Lambda_o} cosh[beta m_i] * prod_{i in Lambda_e} e^{beta sigma_i sum_{j notin Lambda} k(i-j) tau_j},
/// and that nu_Lambda^tau factorizes over the two sublattices.
inline IsingCorrespondence ising_correspondence_check(const Box& box, const BoundaryCondition& bc,
                                                      const PcaParams& params) {
  const CouplingKernel& k = params.kernel;
  if (box.dim() != 2 || k.dim() != 2) throw Error("Ising correspondence needs a planar model");
  if (k.at({0, 0}) != 0.0) throw Error("Ising correspondence needs k(0) = 0");
  if (bc.is_periodic()) throw Error("Ising correspondence check uses a fixed boundary condition");
  for (const auto& [o, w] : k.support())
    if (std::abs(o[0]) + std::abs(o[1]) != 1) throw Error("Ising correspondence needs a nearest-neighbour kernel");
  if (params.h != 0.0) throw Error("Ising correspondence needs h = 0");
  if (box.size() > 16) throw Error("Ising correspondence check is limited to 16 sites");

  const Distribution rho = ising_table(box, bc, params.beta, k.at({1, 0}), k.at({0, 1}));
  const auto [even, odd] = sublattice_indices(box);
  const std::size_t me = detail::mask_of(even);

  std::vector<double> marginal(rho.states(), 0.0);
  for (std::size_t c = 0; c < rho.states(); ++c) marginal[c & me] += rho[c];

  // Product law on even configurations (odd bits cleared).
  const auto exterior = detail::exterior_sums(box, bc, k);
  std::vector<double> logw;
  std::vector<std::size_t> codes;
  for (std::size_t c = 0; c < rho.states(); ++c) {
    if ((c & ~me) != 0) continue;
    const SpinConfig config = SpinConfig::decode(box, c);
    const ExtendedConfig ext(config, bc);
    double lw = 0.0;
    for (std::size_t i : odd) lw += log_cosh(params.beta * local_field(box.site(i), ext, params));
    for (std::size_t i : even) lw += params.beta * config[i] * exterior[i];
    logw.push_back(lw);
    codes.push_back(c);
  }
  double mx = logw.front();
  for (double v : logw) mx = std::max(mx, v);
  double z = 0.0;
  for (double& v : logw) z += (v = std::exp(v - mx));

  IsingCorrespondence out;
  for (std::size_t t = 0; t < codes.size(); ++t)
    out.marginal_deviation = std::max(out.marginal_deviation, std::fabs(marginal[codes[t]] - logw[t] / z));
  out.factorization_defect = factorization_defect(stationary_table(box, bc, params));
  return out;
}

}  // namespace pca
