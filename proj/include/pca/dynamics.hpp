#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <vector>

#include "pca/spin.hpp"

namespace pca {

/// Compiled form of sum_j k(i - j) sigma~_j over a box: interior neighbours as
/// (index, weight) lists and the frozen exterior part as a per-site constant.
class FieldStencil {
 public:
  FieldStencil() = default;
  FieldStencil(const Box& box, const BoundaryCondition& bc, const CouplingKernel& kernel) {
    if (kernel.dim() != box.dim()) throw Error("kernel and box dimensions differ");
    const std::size_t n = box.size();
    begin_.assign(n + 1, 0);
    exterior_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const Site si = box.site(i);
      for (const auto& [o, w] : kernel.support()) {
        const Site j = si - o;
        if (auto idx = box.index_of(j)) {
          neighbor_.push_back(static_cast<std::uint32_t>(*idx));
          weight_.push_back(w);
        } else if (bc.is_periodic()) {
          neighbor_.push_back(static_cast<std::uint32_t>(*box.index_of(box.wrap(j))));
          weight_.push_back(w);
        } else {
          auto tau = bc.exterior(j);
          if (!tau) throw Error("missing boundary spin at " + j.str());
          exterior_[i] += w * *tau;
        }
      }
      begin_[i + 1] = neighbor_.size();
    }
  }

  std::size_t size() const { return exterior_.size(); }

  /// sum_j k(i - j) sigma~_j for the configuration `spins`.
  double field(std::size_t i, std::span<const Spin> spins) const {
    double m = exterior_[i];
    for (std::size_t e = begin_[i]; e < begin_[i + 1]; ++e) m += weight_[e] * spins[neighbor_[e]];
    return m;
  }

  /// sum_{j outside the box} k(i - j) tau_j (zero on a torus).
  double exterior(std::size_t i) const { return exterior_[i]; }

 private:
  std::vector<std::size_t> begin_;
  std::vector<std::uint32_t> neighbor_;
  std::vector<double> weight_;
  std::vector<double> exterior_;
};

/// Everything that defines P_Lambda^tau (or P_Lambda^per).
class TransitionContext {
 public:
  TransitionContext(PcaParams params, Box box, BoundaryCondition bc)
      : params_(std::move(params)), box_(std::move(box)), bc_(std::move(bc)) {
    params_.validate();
    stencil_ = FieldStencil(box_, bc_, params_.kernel);
  }

  const PcaParams& params() const { return params_; }
  const Box& box() const { return box_; }
  const BoundaryCondition& bc() const { return bc_; }
  const FieldStencil& stencil() const { return stencil_; }
  std::size_t size() const { return box_.size(); }

  /// beta * (sum_j k(i-j) sigma~_j + h) for a configuration of this box.
  double scaled_field(std::size_t i, std::span<const Spin> spins) const {
    return params_.beta * (stencil_.field(i, spins) + params_.h);
  }

  /// Probability that site i becomes +1 given the previous configuration.
  double prob_plus(std::size_t i, std::span<const Spin> spins) const { return spin_prob(1, scaled_field(i, spins)); }

 private:
  PcaParams params_;
  Box box_;
  BoundaryCondition bc_;
  FieldStencil stencil_;
};

/// p_i(s | eta~) = (1 + s tanh(beta m_i)) / 2.
inline double site_prob(int s, const Site& i, const ExtendedConfig& ext, const TransitionContext& ctx) {
  if (!is_spin(s)) throw Error("spin must be -1 or +1");
  const PcaParams& p = ctx.params();
  return spin_prob(s, p.beta * local_field(i, ext, p));
}

/// log P_Lambda(next | prev) = sum_i log p_i(next_i | prev~).
inline double transition_log_prob(const SpinConfig& next, const SpinConfig& prev, const TransitionContext& ctx) {
  if (!(next.box() == ctx.box()) || !(prev.box() == ctx.box())) throw Error("configuration box differs from context");
  double lp = 0.0;
  for (std::size_t i = 0; i < ctx.size(); ++i) lp += log_spin_prob(next[i], ctx.scaled_field(i, prev.spins()));
  return lp;
}

template <class Source>
concept UniformSource = requires(const Source& u, std::uint64_t step, std::size_t site) {
  { u(step, site) } -> std::convertible_to<double>;
};

/// One synchronous update: next_i = +1 iff u(step, i) < p_i(+1 | prev).
template <UniformSource Source>
void step_into(std::span<const Spin> prev, std::span<Spin> next, const TransitionContext& ctx, const Source& u,
               std::uint64_t step, unsigned workers = 1) {
  parallel_for(ctx.size(), workers, [&](std::size_t i) {
    next[i] = u(step, i) < ctx.prob_plus(i, prev) ? Spin{1} : Spin{-1};
  });
}

template <UniformSource Source>
SpinConfig step_sample(const SpinConfig& prev, const TransitionContext& ctx, const Source& u, std::uint64_t step = 0,
                       unsigned workers = 1) {
  if (!(prev.box() == ctx.box())) throw Error("configuration box differs from context");
  SpinConfig next(ctx.box());
  step_into(prev.spins(), next.mutable_spins(), ctx, u, step, workers);
  return next;
}

}  // namespace pca
