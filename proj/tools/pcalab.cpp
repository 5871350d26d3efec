#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pca/pca.hpp"

using namespace pca;

namespace {

struct RunConfig {
  std::string subcommand;
  std::string model_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string out;
  unsigned workers = 1;
};

// Exit codes: 0 pass, 1 check failure, 2 usage or configuration error.
constexpr int kCheckFailure = 1;
constexpr int kUsageError = 2;

unsigned default_workers() {
  if (const char* env = std::getenv("PCALAB_WORKERS")) {
    try {
      const int w = std::stoi(env);
      if (w >= 1) return static_cast<unsigned>(w);
    } catch (const std::exception&) {
    }
    throw Error(std::string("PCALAB_WORKERS='") + env + "' is not a positive integer");
  }
  return 1;
}

ModelSpec resolve_model(const RunConfig& rc) {
  ModelSpec spec = rc.model_path.empty() ? ModelSpec() : ModelSpec::load(rc.model_path);
  for (const auto& o : rc.overrides) spec.set(o);
  return spec;
}

std::string header(const RunConfig& rc, const ModelSpec* spec, const std::vector<std::pair<std::string, std::string>>& extra) {
  std::ostringstream os;
  os << "# pcalab " << rc.subcommand << '\n';
  os << "# model_file = " << (rc.model_path.empty() ? "(defaults)" : rc.model_path) << '\n';
  for (const auto& o : rc.overrides) os << "# override = " << o << '\n';
  os << "# seed = " << rc.seed << '\n';
  os << "# workers = " << rc.workers << '\n';
  for (const auto& [k, v] : extra) os << "# " << k << " = " << v << '\n';
  if (spec) os << spec->describe("# model.");
  return os.str();
}

void emit(const RunConfig& rc, const std::string& text) {
  if (rc.out.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(rc.out, std::ios::binary);
  if (!f) throw Error("cannot write output file '" + rc.out + "'");
  f << text;
}

std::string g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

SpinConfig initial_state(const std::string& init, const Box& box, std::uint64_t seed) {
  if (init == "plus") return SpinConfig(box, Spin{1});
  if (init == "minus") return SpinConfig(box, Spin{-1});
  if (init == "random") {
    std::mt19937_64 rng(seed);
    return SpinConfig::random(box, rng);
  }
  throw Error("unknown initial state '" + init + "' (expected plus, minus or random)");
}

int exact_verify(const RunConfig& rc, const std::vector<std::string>& checks, std::size_t ceiling) {
  SuiteOptions opt;
  opt.seed = rc.seed;
  opt.ceiling = ceiling;
  opt.workers = rc.workers;
  opt.only.insert(checks.begin(), checks.end());
  const bool model_given = !rc.model_path.empty() || !rc.overrides.empty();
  std::vector<CheckRow> rows;
  std::optional<ModelSpec> spec;
  if (model_given) {
    spec = resolve_model(rc);
    for (const auto& name : opt.only)
      if (std::find(check_families().begin(), check_families().end(), name) == check_families().end())
        throw Error("unknown check family '" + name + "'");
    rows = instance_checks({spec->box(), spec->boundary(), spec->params()}, opt);
  } else {
    rows = exact_suite(opt);
  }
  std::string filter;
  for (const auto& c : checks) filter += (filter.empty() ? "" : ",") + c;
  std::ostringstream os;
  os << header(rc, spec ? &*spec : nullptr,
               {{"suite", model_given ? "model instance" : "randomized"},
                {"check", filter.empty() ? "all" : filter},
                {"ceiling", std::to_string(ceiling)}});
  write_check_csv(os, rows);
  emit(rc, os.str());
  int failed = 0;
  for (const auto& r : rows)
    if (!r.pass) {
      ++failed;
      std::cerr << "pcalab: check " << r.check << " failed on " << r.instance << " (residual " << r.value << ")\n";
    }
  return failed ? kCheckFailure : 0;
}

int peierls(const RunConfig& rc) {
  const ModelSpec spec = resolve_model(rc);
  const PcaParams p = spec.params();
  const PeierlsBound b = peierls_bound(p.beta, p.kernel);
  const auto thr = peierls_beta_threshold(p.kernel, 0.5, 1e-6);
  const char* flag = b.status == BoundStatus::converged ? "converged"
                     : b.status == BoundStatus::non_contractive ? "non-contractive"
                                                                : "divergent";
  std::ostringstream os;
  os << header(rc, &spec, {{"threshold_target", "0.5"}, {"threshold_tolerance", "1e-06"}});
  os << "A,B,r,bound,flag,beta_threshold\n";
  os << g12(b.A) << ',' << g12(b.B) << ',' << g12(b.r) << ',' << (b.status == BoundStatus::converged ? g12(b.bound) : "")
     << ',' << flag << ',' << (thr ? g12(*thr) : "") << '\n';
  emit(rc, os.str());
  return 0;
}

RunSettings settings(const RunConfig& rc, std::uint64_t steps, std::uint64_t burnin, std::uint64_t thinning) {
  RunSettings s;
  s.steps = steps;
  s.burnin = burnin;
  s.thinning = thinning;
  s.seed = rc.seed;
  s.workers = rc.workers;
  return s;
}

ExperimentRecord base_record(const PcaParams& p, const BoundaryCondition& bc, const Box& box, std::uint64_t steps,
                             std::uint64_t burnin, std::uint64_t seed) {
  ExperimentRecord r;
  r.beta = p.beta;
  r.h = p.h;
  r.kernel = kernel_tag(p.kernel);
  r.bc = bc.str();
  r.lattice = box.str();
  r.steps = steps;
  r.burnin = burnin;
  r.seed = seed;
  return r;
}

std::vector<std::pair<std::string, std::string>> run_fields(const RunSettings& s) {
  return {{"steps", std::to_string(s.steps)}, {"burnin", std::to_string(s.burnin)}, {"thinning", std::to_string(s.thinning)}};
}

int simulate(const RunConfig& rc, const RunSettings& s, const std::string& init, const std::string& snapshot) {
  const ModelSpec spec = resolve_model(rc);
  const TransitionContext ctx(spec.params(), spec.box(), spec.boundary());
  const ChainRun run = run_chain(ctx, initial_state(init, ctx.box(), rc.seed), s);
  const BatchEstimate est = batch_means(run.magnetization);
  ExperimentRecord r = base_record(ctx.params(), ctx.bc(), ctx.box(), s.steps, s.burnin, rc.seed);
  r.estimate = est.mean;
  r.stderr_ = est.stderr_;
  auto fields = run_fields(s);
  fields.emplace_back("init", init);
  const std::string head = header(rc, &spec, fields);
  std::ostringstream os;
  os << head << ExperimentRecord::csv_header() << '\n';
  r.write_csv(os);
  emit(rc, os.str());
  if (!snapshot.empty()) {
    std::ofstream f(snapshot, std::ios::binary);
    if (!f) throw Error("cannot write snapshot file '" + snapshot + "'");
    f << head << "# final configuration\n";
    write_grid(f, run.final_state);
  }
  return 0;
}

int phase(const RunConfig& rc, const RunSettings& s, const std::vector<double>& betas) {
  const ModelSpec spec = resolve_model(rc);
  const PcaParams p = spec.params();
  if (p.h != 0.0) throw Error("phase-scan runs at h = 0");
  if (betas.empty()) throw Error("--betas needs at least one value");
  std::string list;
  for (double b : betas) list += (list.empty() ? "" : ",") + g12(b);
  auto fields = run_fields(s);
  fields.emplace_back("betas", list);
  fields.emplace_back("bc_pair", "plus,minus");
  std::ostringstream os;
  os << header(rc, &spec, fields) << ExperimentRecord::csv_header() << '\n';
  for (const auto& r : phase_scan(betas, spec.box(), p.kernel, s, rc.workers)) r.write_csv(os);
  emit(rc, os.str());
  return 0;
}

// The record's estimate is the time-staggered magnetization mean of (-1)^t m_t over t >= 1.
int nonstat(const RunConfig& rc, std::uint64_t steps, const std::string& trajectory) {
  const ModelSpec spec = resolve_model(rc);
  const PcaParams p = spec.params();
  if (p.h != 0.0) throw Error("nonstat runs at h = 0");
  const Box box = spec.box();
  const auto rec = nonstationarity_run(p.kernel, p.beta, box, steps, rc.seed, spec.boundary(), rc.workers);
  std::vector<double> staggered;
  for (std::size_t t = 1; t < rec.magnetization.size(); ++t)
    staggered.push_back(t % 2 ? -rec.magnetization[t] : rec.magnetization[t]);
  const BatchEstimate est = batch_means(staggered);
  ExperimentRecord r = base_record(p, spec.boundary(), box, steps, 0, rc.seed);
  r.estimate = est.mean;
  r.stderr_ = est.stderr_;
  const auto& alt = rec.alternation;
  const std::string verdict = alt.holds ? "holds" : "fails at t=" + std::to_string(*alt.first_failure);
  const std::string head = header(rc, &spec,
                                  {{"steps", std::to_string(steps)}, {"init", "plus"},
                                   {"estimate", "mean of (-1)^t m_t, t >= 1"}, {"alternation", verdict},
                                   {"m1", g12(rec.magnetization.at(1))}});
  std::ostringstream os;
  os << head << ExperimentRecord::csv_header() << '\n';
  r.write_csv(os);
  emit(rc, os.str());
  if (!trajectory.empty()) {
    std::ofstream f(trajectory, std::ios::binary);
    if (!f) throw Error("cannot write trajectory file '" + trajectory + "'");
    f << head << "t,magnetization\n";
    for (std::size_t t = 0; t < rec.magnetization.size(); ++t) f << t << ',' << g12(rec.magnetization[t]) << '\n';
  }
  return 0;
}

// The record's estimate is the number of steps that broke the pointwise order.
int couple(const RunConfig& rc, std::uint64_t steps) {
  const ModelSpec spec = resolve_model(rc);
  const TransitionContext ctx(spec.params(), spec.box(), spec.boundary());
  const CouplingReport rep =
      coupled_run(ctx, SpinConfig(ctx.box(), Spin{-1}), SpinConfig(ctx.box(), Spin{1}), steps, rc.seed);
  ExperimentRecord r = base_record(ctx.params(), ctx.bc(), ctx.box(), steps, 0, rc.seed);
  r.estimate = static_cast<double>(rep.violations);
  std::ostringstream os;
  os << header(rc, &spec,
               {{"steps", std::to_string(steps)},
                {"kind", rep.kind == Monotonicity::increasing ? "increasing" : "decreasing"},
                {"start", "lower all -1, upper all +1"},
                {"estimate", "ordering violations"},
                {"first_violation", rep.first_violation ? std::to_string(*rep.first_violation) : "none"}})
     << ExperimentRecord::csv_header() << '\n';
  r.write_csv(os);
  emit(rc, os.str());
  if (rep.violations) {
    std::cerr << "pcalab: coupling order broken at step " << *rep.first_violation << '\n';
    return kCheckFailure;
  }
  return 0;
}

int contours(const RunConfig& rc, const std::string& grid_path) {
  const ModelSpec spec = resolve_model(rc);
  const PcaParams p = spec.params();
  std::ifstream in(grid_path);
  if (!in) throw Error("cannot open configuration file '" + grid_path + "'");
  const SpinConfig config = read_grid(in);
  const auto classes = analyze_contours(config);
  std::ostringstream os;
  os << header(rc, &spec, {{"config", grid_path}, {"grid", config.box().str()}, {"frame", "plus"}});
  os << "class_id,length,boundary_plus,boundary_minus,weight_F\n";
  for (std::size_t c = 0; c < classes.size(); ++c)
    os << c << ',' << classes[c].length() << ',' << classes[c].boundary_plus.size() << ','
       << classes[c].boundary_minus.size() << ',' << g12(contour_weight(classes[c], config, p)) << '\n';
  emit(rc, os.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcalab: exact and Monte Carlo analysis of reversible probabilistic cellular automata"};
  app.require_subcommand(1);
  RunConfig rc;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--model", rc.model_path, "Model file (key = value lines)");
    sub->add_option("--set", rc.overrides, "Override a model key, e.g. --set beta=0.7 (repeatable)");
    sub->add_option("--seed", rc.seed, "Random seed")->capture_default_str();
    sub->add_option("--out", rc.out, "Output path (default stdout)");
    sub->add_option("--workers", rc.workers, "Worker threads (default $PCALAB_WORKERS or 1)")->check(CLI::PositiveNumber);
  };

  std::vector<std::string> checks;
  std::size_t ceiling = 12;
  auto* ev = app.add_subcommand("exact-verify", "Exhaustive exact checks (randomized suite, or the given model)");
  common(ev);
  ev->add_option("--check", checks, "Restrict to a check family (repeatable)");
  ev->add_option("--ceiling", ceiling, "Largest box size enumerated exactly")->capture_default_str()->check(CLI::Range(1, 20));

  auto* pb = app.add_subcommand("peierls-bound", "Peierls constants, bound and beta threshold");
  common(pb);

  std::uint64_t steps = 1000, burnin = 1000, thinning = 1;
  std::string init = "plus", snapshot;
  auto* sim = app.add_subcommand("simulate", "Run one chain and report the magnetization");
  common(sim);
  sim->add_option("--steps", steps, "Sampling steps")->capture_default_str();
  sim->add_option("--burnin", burnin, "Burn-in steps")->capture_default_str();
  sim->add_option("--thinning", thinning, "Keep every n-th sample")->capture_default_str();
  sim->add_option("--init", init, "Initial state: plus, minus or random")->capture_default_str();
  sim->add_option("--snapshot", snapshot, "Write the final configuration as a +/- grid");

  std::vector<double> betas{0.2, 0.6, 1.0};
  auto* ps = app.add_subcommand("phase-scan", "Magnetization under + and - frames for each beta");
  common(ps);
  ps->add_option("--betas", betas, "Comma-separated inverse temperatures")->delimiter(',');
  ps->add_option("--steps", steps, "Sampling steps")->capture_default_str();
  ps->add_option("--burnin", burnin, "Burn-in steps")->capture_default_str();
  ps->add_option("--thinning", thinning, "Keep every n-th sample")->capture_default_str();

  std::uint64_t ns_steps = 100;
  std::string trajectory;
  auto* ns = app.add_subcommand("nonstat", "Alternating trajectory from all +1 for antiferromagnetic kernels");
  common(ns);
  ns->add_option("--steps", ns_steps, "Steps")->capture_default_str();
  ns->add_option("--trajectory", trajectory, "Write t,magnetization for every step");

  std::uint64_t cp_steps = 1000;
  auto* cp = app.add_subcommand("couple", "Monotone coupling from all -1 and all +1");
  common(cp);
  cp->add_option("--steps", cp_steps, "Steps")->capture_default_str();

  std::string grid;
  auto* ca = app.add_subcommand("contour-analyze", "Peierls contour classes of a +/- grid");
  common(ca);
  ca->add_option("--config", grid, "Configuration grid file")->required();

  try {
    rc.workers = default_workers();
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  } catch (const Error& e) {
    std::cerr << "pcalab: error: " << e.what() << '\n';
    return kUsageError;
  }

  try {
    rc.subcommand = app.get_subcommands().front()->get_name();
    if (*ev) return exact_verify(rc, checks, ceiling);
    if (*pb) return peierls(rc);
    if (*sim) return simulate(rc, settings(rc, steps, burnin, thinning), init, snapshot);
    if (*ps) return phase(rc, settings(rc, steps, burnin, thinning), betas);
    if (*ns) return nonstat(rc, ns_steps, trajectory);
    if (*cp) return couple(rc, cp_steps);
    if (*ca) return contours(rc, grid);
  } catch (const std::exception& e) {
    std::cerr << "pcalab: error: " << e.what() << '\n';
    return kUsageError;
  }
  return kUsageError;
}
