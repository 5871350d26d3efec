#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "pca/exact.hpp"

namespace pca {

/// One exhaustive-enumeration check on one instance. `value` is a residual
/// compared as value <= threshold, or value > threshold for control checks.
struct CheckRow {
  std::string check;
  std::string instance;
  double value = 0.0;
  double threshold = 0.0;
  bool control = false;
  bool pass = false;
};

struct ExactInstance {
  Box box;
  BoundaryCondition bc;
  PcaParams params;

  std::string descriptor() const {
    std::ostringstream os;
    os.precision(6);
    os << "box=" << box.str() << " bc=" << bc.str() << " beta=" << params.beta << " h=" << params.h
       << " k=" << kernel_tag(params.kernel);
    return os.str();
  }
};

inline CouplingKernel random_range1_kernel(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(-1.0, 1.0);
  return CouplingKernel::symmetric_completion(
      2, {{Site{0, 0}, w(rng)}, {Site{1, 0}, w(rng)}, {Site{0, 1}, w(rng)}, {Site{1, 1}, w(rng)}, {Site{1, -1}, w(rng)}});
}

/// Boxes 1x1 .. 3x3, beta in (0, 2], h in [-1, 1], random range-1 kernels,
/// frames cycling through +, -, random tau and periodic.
inline std::vector<ExactInstance> randomized_instances(std::uint64_t seed, std::size_t count = 20) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> side(1, 3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<ExactInstance> out;
  for (std::size_t n = 0; n < count; ++n) {
    const Box box({side(rng), side(rng)});
    const double beta = 2.0 * (1.0 - u(rng));
    const double h = 2.0 * u(rng) - 1.0;
    const CouplingKernel k = random_range1_kernel(rng);
    BoundaryCondition bc = BoundaryCondition::periodic();
    switch (n % 4) {
      case 0: bc = BoundaryCondition::plus(); break;
      case 1: bc = BoundaryCondition::minus(); break;
      case 2: bc = BoundaryCondition::random(box, 2 * k.range(), rng); break;
      default: break;
    }
    out.push_back({box, bc, PcaParams(beta, h, k)});
  }
  return out;
}

struct SuiteOptions {
  std::uint64_t seed = 20240601;
  std::size_t ceiling = 12;
  unsigned workers = 1;
  std::set<std::string> only;  // empty: every family
};

inline const std::vector<std::string>& check_families() {
  static const std::vector<std::string> names{"detailed-balance",  "stationarity",       "periodic-identity",
                                              "two-route",         "entropy-production", "kl-monotone",
                                              "transform-gibbs",   "transform-stationary", "ising-marginal",
                                              "ising-factorization", "ising-control"};
  return names;
}

namespace detail {

inline void require_ceiling(const Box& box, std::size_t ceiling) {
  if (box.size() > ceiling)
    throw Error("box " + box.str() + " has " + std::to_string(box.size()) + " sites, above the exact ceiling of " +
                std::to_string(ceiling));
  require_exact_size(box);
}

inline CheckRow row(std::string check, std::string instance, double value, double threshold, bool control = false) {
  const bool pass = control ? value > threshold : value <= threshold;
  return {std::move(check), std::move(instance), value, threshold, control, pass};
}

inline Distribution random_law(const Box& box, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(std::size_t{1} << box.size());
  double z = 0.0;
  for (double& v : p) z += (v = e(rng));
  for (double& v : p) v /= z;
  return Distribution(box, std::move(p));
}

inline double image_deviation(const Distribution& a, const Distribution& b, const ModelTransform& t) {
  double dev = 0.0;
  for (std::uint64_t c = 0; c < a.states(); ++c)
    dev = std::max(dev, std::fabs(a[c] - b[t.apply(SpinConfig::decode(a.box, c)).encode()]));
  return dev;
}

}  // namespace detail

/// Reversibility, stationarity and two-route checks for one model instance.
inline std::vector<CheckRow> instance_checks(const ExactInstance& inst, const SuiteOptions& opt) {
  detail::require_ceiling(inst.box, opt.ceiling);
  const auto want = [&](const std::string& name) { return opt.only.empty() || opt.only.count(name); };
  std::vector<CheckRow> rows;
  const std::string id = inst.descriptor();
  if (want("detailed-balance") || want("stationarity")) {
    const TransitionMatrix P = build_matrix(TransitionContext(inst.params, inst.box, inst.bc), opt.workers);
    const Distribution nu = stationary_table(inst.box, inst.bc, inst.params);
    if (want("detailed-balance")) rows.push_back(detail::row("detailed-balance", id, detailed_balance_residual(P, nu), 1e-12));
    if (want("stationarity")) rows.push_back(detail::row("stationarity", id, total_variation(push_forward(nu, P), nu), 1e-12));
  }
  if (want("periodic-identity") && inst.bc.is_periodic())
    rows.push_back(detail::row("periodic-identity", id,
                               max_abs_diff(stationary_table(inst.box, inst.bc, inst.params),
                                            gibbs_table(inst.box, inst.bc, inst.params)),
                               1e-12));
  if (want("two-route"))
    rows.push_back(detail::row("two-route", id,
                               max_abs_diff(gibbs_table(inst.box, inst.bc, inst.params),
                                            gibbs_product_table(inst.box, inst.bc, inst.params)),
                               1e-12));
  return rows;
}

/// The full randomized suite over every check family.
inline std::vector<CheckRow> exact_suite(const SuiteOptions& opt) {
  const auto want = [&](const std::string& name) { return opt.only.empty() || opt.only.count(name); };
  for (const auto& name : opt.only)
    if (std::find(check_families().begin(), check_families().end(), name) == check_families().end())
      throw Error("unknown check family '" + name + "'");
  std::vector<CheckRow> rows;
  const auto append = [&](std::vector<CheckRow> more) { rows.insert(rows.end(), more.begin(), more.end()); };
  std::mt19937_64 rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);

  SuiteOptions base = opt;
  base.only.clear();
  for (const auto& name : {"detailed-balance", "stationarity", "two-route"})
    if (want(name)) base.only.insert(name);
  if (!base.only.empty())
    for (const auto& inst : randomized_instances(opt.seed)) append(instance_checks(inst, base));

  if (want("periodic-identity") || want("two-route")) {
    SuiteOptions torus = opt;
    torus.only.clear();
    for (const auto& name : {"periodic-identity", "two-route"})
      if (want(name)) torus.only.insert(name);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (const Box& box : {Box({2, 2}), Box({3, 3})})
      for (int n = 0; n < 10; ++n) {
        const PcaParams p(2.0 * (1.0 - u(rng)), 2.0 * u(rng) - 1.0, random_range1_kernel(rng));
        append(instance_checks({box, BoundaryCondition::periodic(), p}, torus));
      }
  }

  if (want("entropy-production") || want("kl-monotone")) {
    const Box box({2, 2});
    detail::require_ceiling(box, opt.ceiling);
    const ExactInstance inst{box, BoundaryCondition::periodic(), PcaParams(0.9, 0.2, random_range1_kernel(rng))};
    const TransitionMatrix P = build_matrix(TransitionContext(inst.params, box, inst.bc), opt.workers);
    const Distribution mu = stationary_distribution(P);
    for (int n = 0; n < 10; ++n) {
      const Distribution nu0 = n == 0 ? Distribution::point_mass(box, 0) : detail::random_law(box, rng);
      const std::string id = inst.descriptor() + " start=" + std::to_string(n);
      if (want("entropy-production")) {
        const EntropyProduction ep = entropy_production(nu0, P, mu);
        rows.push_back(detail::row("entropy-production", id, std::fabs(ep.lhs - ep.rhs), 1e-10));
      }
      if (want("kl-monotone")) {
        Distribution nu = nu0;
        double prev = relative_entropy(nu, mu), worst = 0.0;
        for (int t = 0; t < 50; ++t) {
          nu = push_forward(nu, P);
          const double cur = relative_entropy(nu, mu);
          worst = std::max(worst, cur - prev);
          prev = cur;
        }
        rows.push_back(detail::row("kl-monotone", id, worst, 1e-15));
      }
    }
  }

  if (want("transform-gibbs") || want("transform-stationary")) {
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    for (int tag : {2, 3}) {
      const CouplingKernel k = CouplingKernel::nearest_neighbour(w(rng), w(rng), w(rng));
      const ModelTransform t = transform_model(tag, k);
      const PcaParams p(1.2, 0.0, k), q(1.2, 0.0, t.kernel());
      if (want("transform-gibbs")) {
        const Box box({3, 3});
        detail::require_ceiling(box, opt.ceiling);
        for (const auto& tau : {BoundaryCondition::plus(), BoundaryCondition::minus(), BoundaryCondition::random(box, 2, rng)}) {
          const double dev = detail::image_deviation(gibbs_table(box, tau, p), gibbs_table(box, t.apply(tau, box, 2), q), t);
          rows.push_back(detail::row("transform-gibbs", ExactInstance{box, tau, p}.descriptor() + " case=" + std::to_string(tag),
                                     dev, 1e-12));
        }
      }
      if (want("transform-stationary")) {
        const PcaParams ps(0.8, 0.0, k), qs(0.8, 0.0, t.kernel());
        for (const Box& box : {Box({2, 2}), Box({2, 4})}) {
          detail::require_ceiling(box, opt.ceiling);
          const auto per = BoundaryCondition::periodic();
          const Distribution nu = stationary_distribution(build_matrix(TransitionContext(ps, box, per), opt.workers));
          const Distribution nu_star = stationary_distribution(build_matrix(TransitionContext(qs, box, per), opt.workers));
          rows.push_back(detail::row("transform-stationary",
                                     ExactInstance{box, per, ps}.descriptor() + " case=" + std::to_string(tag),
                                     detail::image_deviation(nu, nu_star, t), 1e-10));
        }
      }
    }
  }

  if (want("ising-marginal") || want("ising-factorization") || want("ising-control")) {
    const Box box({3, 3});
    detail::require_ceiling(box, opt.ceiling);
    std::vector<ExactInstance> cases{
        {box, BoundaryCondition::plus(), PcaParams(0.7, 0.0, CouplingKernel::nearest_neighbour(0, 1, 1))},
        {box, BoundaryCondition::plus(), PcaParams(0.7, 0.0, CouplingKernel::nearest_neighbour(0, 1, 0.3))},
        {box, BoundaryCondition::random(box, 2, rng), PcaParams(0.3, 0.0, CouplingKernel::nearest_neighbour(0, 1, 1))},
        {box, BoundaryCondition::random(box, 2, rng), PcaParams(0.9, 0.0, CouplingKernel::nearest_neighbour(0, 0.8, -0.6))},
    };
    for (const auto& inst : cases) {
      const IsingCorrespondence r = ising_correspondence_check(inst.box, inst.bc, inst.params);
      if (want("ising-marginal")) rows.push_back(detail::row("ising-marginal", inst.descriptor(), r.marginal_deviation, 1e-12));
      if (want("ising-factorization"))
        rows.push_back(detail::row("ising-factorization", inst.descriptor(), r.factorization_defect, 1e-12));
    }
    if (want("ising-control")) {
      const ExactInstance control{box, BoundaryCondition::plus(), PcaParams(0.3, 0.0, CouplingKernel::nearest_neighbour(0.5, 1, 1))};
      rows.push_back(detail::row("ising-control", control.descriptor(),
                                 factorization_defect(stationary_table(box, control.bc, control.params)), 1e-3, true));
    }
  }
  return rows;
}

inline void write_check_csv(std::ostream& os, const std::vector<CheckRow>& rows) {
  os << "check_name,instance_descriptor,residual,pass\n";
  const auto old = os.precision(6);
  for (const auto& r : rows) os << r.check << ',' << r.instance << ',' << std::scientific << r.value << std::defaultfloat << ','
                                << (r.pass ? "true" : "false") << '\n';
  os.precision(old);
}

}  // namespace pca
