#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pca/dynamics.hpp"

namespace pca {

inline double magnetization(std::span<const Spin> spins) {
  if (spins.empty()) return 0.0;
  long s = 0;
  for (Spin v : spins) s += v;
  return static_cast<double>(s) / static_cast<double>(spins.size());
}

inline double magnetization(const SpinConfig& config) { return magnetization(config.spins()); }

/// Per-site value of the potential restricted to terms centred in Lambda:
/// -(1/|Lambda|) sum_i [beta h sigma_i + log cosh(beta m_i)].
inline double energy_density(const TransitionContext& ctx, std::span<const Spin> spins) {
  const double bh = ctx.params().beta * ctx.params().h;
  double e = 0.0;
  for (std::size_t i = 0; i < ctx.size(); ++i) e -= bh * spins[i] + log_cosh(ctx.scaled_field(i, spins));
  return e / static_cast<double>(ctx.size());
}

struct RunSettings {
  std::uint64_t steps = 1000;
  std::uint64_t burnin = 1000;
  std::uint64_t thinning = 1;
  std::uint64_t seed = 1;
  unsigned workers = 1;
};

struct ChainRun {
  RunSettings settings;
  std::vector<double> magnetization;
  std::vector<double> energy;
  SpinConfig final_state;
};

/// Runs burn-in plus sampling steps from `init`; step t uses the uniforms u(t, .).
inline ChainRun run_chain(const TransitionContext& ctx, const SpinConfig& init, const RunSettings& s) {
  if (!(init.box() == ctx.box())) throw Error("initial configuration box differs from context");
  if (s.thinning == 0) throw Error("thinning must be positive");
  const CounterUniform u(s.seed);
  std::vector<Spin> cur = init.spins(), next(cur.size());
  ChainRun run;
  run.settings = s;
  const std::uint64_t total = s.burnin + s.steps;
  for (std::uint64_t t = 0; t < total; ++t) {
    step_into(cur, next, ctx, u, t, s.workers);
    cur.swap(next);
    if (t >= s.burnin && (t - s.burnin) % s.thinning == 0) {
      run.magnetization.push_back(magnetization(cur));
      run.energy.push_back(energy_density(ctx, cur));
    }
  }
  run.final_state = SpinConfig(ctx.box(), std::move(cur));
  return run;
}

struct BatchEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

/// Mean with a batch-means standard error.
inline BatchEstimate batch_means(const std::vector<double>& xs, std::size_t batches = 20) {
  if (batches < 2 || xs.size() < batches) throw Error("batch means need at least as many samples as batches (>= 2)");
  const std::size_t per = xs.size() / batches;
  std::vector<double> means(batches, 0.0);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t k = 0; k < per; ++k) means[b] += xs[b * per + k];
    means[b] /= static_cast<double>(per);
  }
  BatchEstimate out;
  out.samples = per * batches;
  for (double m : means) out.mean += m;
  out.mean /= static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - out.mean) * (m - out.mean);
  var /= static_cast<double>(batches - 1);
  out.stderr_ = std::sqrt(var / static_cast<double>(batches));
  return out;
}

struct ExperimentRecord {
  double beta = 0.0;
  double h = 0.0;
  std::string kernel;
  std::string bc;
  std::string lattice;
  std::uint64_t steps = 0;
  std::uint64_t burnin = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
  double wall_seconds = 0.0;

  static const char* csv_header() { return "beta,h,kernel,bc,lattice,steps,burnin,seed,estimate,stderr"; }

  /// Wall-clock time is kept out of the row so equal seeds give equal bytes.
  void write_csv(std::ostream& os) const {
    const auto old = os.precision(12);
    os << beta << ',' << h << ',' << kernel << ',' << bc << ',' << lattice << ',' << steps << ',' << burnin << ','
       << seed << ',' << estimate << ',' << stderr_ << '\n';
    os.precision(old);
  }
};

inline ExperimentRecord magnetization_record(const TransitionContext& ctx, const SpinConfig& init,
                                             const RunSettings& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const ChainRun run = run_chain(ctx, init, s);
  const BatchEstimate est = batch_means(run.magnetization);
  ExperimentRecord r;
  r.beta = ctx.params().beta;
  r.h = ctx.params().h;
  r.kernel = kernel_tag(ctx.params().kernel);
  r.bc = ctx.bc().str();
  r.lattice = ctx.box().str();
  r.steps = s.steps;
  r.burnin = s.burnin;
  r.seed = s.seed;
  r.estimate = est.mean;
  r.stderr_ = est.stderr_;
  r.samples = est.samples;
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Magnetization under + and - fixed frames for each beta (h = 0); records are
/// ordered (beta_0, +), (beta_0, -), (beta_1, +), ... regardless of worker timing.
/// Each chain starts from the ground state matching its frame.
inline std::vector<ExperimentRecord> phase_scan(const std::vector<double>& betas, const Box& box,
                                                const CouplingKernel& kernel, const RunSettings& s,
                                                unsigned parallel_points = 1) {
  if (box.dim() != 2) throw Error("phase scan runs on planar boxes");
  std::vector<ExperimentRecord> out(2 * betas.size());
  RunSettings inner = s;
  if (parallel_points > 1) inner.workers = 1;
  parallel_for(out.size(), parallel_points, [&](std::size_t k) {
    const Spin sign = k % 2 == 0 ? Spin{1} : Spin{-1};
    const TransitionContext ctx(PcaParams(betas[k / 2], 0.0, kernel), box, BoundaryCondition::uniform(sign));
    out[k] = magnetization_record(ctx, SpinConfig(box, sign), inner);
  });
  return out;
}

struct AlternationDiagnostic {
  bool holds = true;
  std::optional<std::size_t> first_failure;
};

/// |m_t| >= threshold for every t and m_t m_{t+1} < 0 for consecutive steps.
inline AlternationDiagnostic alternation_diagnostic(const std::vector<double>& m, double threshold = 0.9) {
  AlternationDiagnostic d;
  for (std::size_t t = 0; t < m.size(); ++t) {
    const bool ok = std::fabs(m[t]) >= threshold && (t + 1 == m.size() || m[t] * m[t + 1] < 0.0);
    if (!ok) {
      d.holds = false;
      d.first_failure = t;
      return d;
    }
  }
  return d;
}

struct NonstationarityRecord {
  std::vector<double> magnetization;  // m_0 .. m_steps
  AlternationDiagnostic alternation;
};

/// Trajectory from all +1 for kernels with k(0) <= 0 and k(e1), k(e2) < 0.
inline NonstationarityRecord nonstationarity_run(const CouplingKernel& kernel, double beta, const Box& box,
                                                 std::uint64_t steps, std::uint64_t seed = 1,
                                                 const BoundaryCondition& bc = BoundaryCondition::plus(),
                                                 unsigned workers = 1, double threshold = 0.9) {
  if (kernel.dim() != 2) throw Error("non-stationarity run needs a planar kernel");
  for (const auto& [o, w] : kernel.support())
    if (std::abs(o[0]) + std::abs(o[1]) > 1) throw Error("non-stationarity run needs a nearest-neighbour kernel");
  if (!(kernel.at({0, 0}) <= 0.0 && kernel.at({1, 0}) < 0.0 && kernel.at({0, 1}) < 0.0))
    throw Error("non-stationarity run needs k(0) <= 0, k(e1) < 0 and k(e2) < 0");
  const TransitionContext ctx(PcaParams(beta, 0.0, kernel), box, bc);
  const CounterUniform u(seed);
  std::vector<Spin> cur(box.size(), 1), next(box.size());
  NonstationarityRecord rec;
  rec.magnetization.push_back(magnetization(cur));
  for (std::uint64_t t = 0; t < steps; ++t) {
    step_into(cur, next, ctx, u, t, workers);
    cur.swap(next);
    rec.magnetization.push_back(magnetization(cur));
  }
  rec.alternation = alternation_diagnostic(rec.magnetization, threshold);
  return rec;
}

enum class Monotonicity { increasing, decreasing };

/// k >= 0 preserves the pointwise order, k <= 0 reverses it; mixed signs have no monotone coupling.
inline Monotonicity monotonicity(const CouplingKernel& k) {
  if (k.all_nonnegative()) return Monotonicity::increasing;
  if (k.all_nonpositive()) return Monotonicity::decreasing;
  throw Error("kernel has mixed signs; the monotone coupling needs a sign-definite kernel");
}

inline bool pointwise_leq(std::span<const Spin> a, std::span<const Spin> b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > b[i]) return false;
  return true;
}

/// Both chains use the same uniform per site with the inversion rule of step_sample.
template <UniformSource Source>
std::pair<SpinConfig, SpinConfig> coupled_step(const std::pair<SpinConfig, SpinConfig>& pair,
                                               const TransitionContext& ctx, const Source& u, std::uint64_t step = 0) {
  monotonicity(ctx.params().kernel);
  return {step_sample(pair.first, ctx, u, step), step_sample(pair.second, ctx, u, step)};
}

struct CouplingReport {
  Monotonicity kind = Monotonicity::increasing;
  std::uint64_t steps = 0;
  std::uint64_t violations = 0;
  std::optional<std::uint64_t> first_violation;
};

/// Runs the coupled pair from lower <= upper and checks the exact pointwise
/// order after every step (reversed at odd steps for decreasing kernels).
inline CouplingReport coupled_run(const TransitionContext& ctx, const SpinConfig& lower, const SpinConfig& upper,
                                  std::uint64_t steps, std::uint64_t seed) {
  if (!pointwise_leq(lower.spins(), upper.spins())) throw Error("coupled run needs lower <= upper pointwise");
  CouplingReport rep;
  rep.kind = monotonicity(ctx.params().kernel);
  rep.steps = steps;
  const CounterUniform u(seed);
  std::pair<SpinConfig, SpinConfig> pair{lower, upper};
  for (std::uint64_t t = 0; t < steps; ++t) {
    pair = coupled_step(pair, ctx, u, t);
    const bool reversed = rep.kind == Monotonicity::decreasing && t % 2 == 0;
    const bool ok = reversed ? pointwise_leq(pair.second.spins(), pair.first.spins())
                             : pointwise_leq(pair.first.spins(), pair.second.spins());
    if (!ok) {
      ++rep.violations;
      if (!rep.first_violation) rep.first_violation = t;
    }
  }
  return rep;
}

/// Visit counts of every canonical configuration over `steps` steps (box of at most 20 sites).
inline std::vector<std::uint64_t> occupation_counts(const TransitionContext& ctx, const SpinConfig& init,
                                                    std::uint64_t steps, std::uint64_t seed) {
  if (ctx.size() > 20) throw Error("occupation counts need a box of at most 20 sites");
  std::vector<std::uint64_t> counts(std::size_t{1} << ctx.size(), 0);
  const CounterUniform u(seed);
  std::vector<Spin> cur = init.spins(), next(cur.size());
  for (std::uint64_t t = 0; t < steps; ++t) {
    step_into(cur, next, ctx, u, t);
    cur.swap(next);
    std::uint64_t code = 0;
    for (std::size_t n = 0; n < cur.size(); ++n)
      if (cur[n] > 0) code |= std::uint64_t{1} << n;
    ++counts[code];
  }
  return counts;
}

}  // namespace pca
