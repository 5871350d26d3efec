#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pca/pca.hpp"

using namespace pca;

namespace {

CouplingKernel random_range1(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> w(-1, 1);
  return CouplingKernel::symmetric_completion(
      2, {{Site{0, 0}, w(rng)}, {Site{1, 0}, w(rng)}, {Site{0, 1}, w(rng)}, {Site{1, 1}, w(rng)}, {Site{1, -1}, w(rng)}});
}

Distribution random_distribution(const Box& box, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> p(std::size_t{1} << box.size());
  double z = 0.0;
  for (double& v : p) z += (v = e(rng));
  for (double& v : p) v /= z;
  return Distribution(box, p);
}

TransitionContext torus_ctx(const Box& box, double beta, std::mt19937_64& rng) {
  return TransitionContext(PcaParams(beta, std::uniform_real_distribution<double>(-1, 1)(rng), random_range1(rng)), box,
                           BoundaryCondition::periodic());
}

}  // namespace

TEST(BuildMatrix, SingleSiteClosedForm) {
  const Box box({1, 1});
  const double beta = 0.8, kappa = 1.3;
  const TransitionMatrix P =
      build_matrix(TransitionContext(PcaParams(beta, 0.0, CouplingKernel(2, {{Site{0, 0}, kappa}})), box, BoundaryCondition::plus()));
  const double t = std::tanh(beta * kappa);
  // index 1 is +1, index 0 is -1
  EXPECT_NEAR(P.at(1, 1), 0.5 * (1 + t), 1e-15);
  EXPECT_NEAR(P.at(1, 0), 0.5 * (1 - t), 1e-15);
  EXPECT_NEAR(P.at(0, 0), 0.5 * (1 + t), 1e-15);
  EXPECT_NEAR(P.at(0, 1), 0.5 * (1 - t), 1e-15);
}

TEST(BuildMatrix, MatchesTransitionLogProbAndIsStochastic) {
  std::mt19937_64 rng(1);
  const Box box({2, 3});
  for (const auto& bc : {BoundaryCondition::periodic(), BoundaryCondition::random(box, 2, rng)}) {
    const TransitionContext ctx(PcaParams(1.1, 0.3, random_range1(rng)), box, bc);
    const TransitionMatrix P = build_matrix(ctx);
    const TransitionMatrix Q = build_matrix(ctx, 3);
    EXPECT_LE(P.max_row_sum_error(), 1e-12);
    for (std::size_t a = 0; a < P.states(); ++a)
      for (std::size_t b = 0; b < P.states(); ++b) {
        ASSERT_GT(P.at(a, b), 0.0);
        ASSERT_EQ(P.at(a, b), Q.at(a, b));
        ASSERT_NEAR(P.at(a, b), std::exp(transition_log_prob(SpinConfig::decode(box, b), SpinConfig::decode(box, a), ctx)),
                    1e-14);
      }
  }
}

TEST(BuildMatrix, RefusesBeyondCeiling) {
  const TransitionContext ctx(PcaParams(1, 0, CouplingKernel::nearest_neighbour(0, 1, 1)), Box({5, 5}), BoundaryCondition::plus());
  EXPECT_THROW(build_matrix(ctx), Error);
}

TEST(Stationary, SingleSiteIsUniform) {
  const Box box({1, 1});
  const TransitionMatrix P = build_matrix(TransitionContext(PcaParams(0.9, 0.0, CouplingKernel(2, {{Site{0, 0}, 0.4}})), box,
                                                            BoundaryCondition::minus()));
  const Distribution nu = stationary_distribution(P);
  EXPECT_NEAR(nu[0], 0.5, 1e-12);
  EXPECT_NEAR(nu[1], 0.5, 1e-12);
}

TEST(Stationary, PowerIterationMatchesClosedForm) {
  std::mt19937_64 rng(2);
  for (const Box& box : {Box({2, 2}), Box({3, 2}), Box({3, 3})}) {
    for (const auto& bc : {BoundaryCondition::plus(), BoundaryCondition::random(box, 2, rng), BoundaryCondition::periodic()}) {
      const PcaParams p(0.6, 0.2, random_range1(rng));
      const TransitionMatrix P = build_matrix(TransitionContext(p, box, bc));
      const Distribution nu = stationary_distribution(P);
      EXPECT_LE(total_variation(push_forward(nu, P), nu), 1e-12);
      EXPECT_LE(max_abs_diff(nu, stationary_table(box, bc, p)), 1e-10) << box.str() << ' ' << bc.str();
    }
  }
}

TEST(Stationary, UniqueFromRandomStarts) {
  std::mt19937_64 rng(3);
  const Box box({2, 2});
  const TransitionMatrix P = build_matrix(torus_ctx(box, 0.8, rng));
  const Distribution ref = stationary_distribution(P);
  for (int rep = 0; rep < 10; ++rep)
    EXPECT_LE(total_variation(stationary_distribution(P, random_distribution(box, rng)), ref), 1e-10);
}

TEST(Stationary, RelabelingEquivariance) {
  // Reversing site order permutes canonical indices; the stationary law permutes alike.
  std::mt19937_64 rng(4);
  const Box box({1, 3});
  const auto k = CouplingKernel::symmetric_completion(2, {{Site{0, 1}, 0.7}, {Site{0, 0}, 0.2}});
  const PcaParams p(0.9, 0.1, k);
  const auto bc = BoundaryCondition::random(box, 2, rng);
  std::map<Site, Spin> mirrored;
  for (const auto& [j, s] : bc.fixed_data().spins) mirrored[Site{j[0], 2 - j[1]}] = s;
  const Distribution a = stationary_distribution(build_matrix(TransitionContext(p, box, bc)));
  const Distribution b = stationary_distribution(build_matrix(TransitionContext(p, box, BoundaryCondition::fixed(mirrored))));
  for (std::uint64_t c = 0; c < 8; ++c) {
    const std::uint64_t r = ((c & 1) << 2) | (c & 2) | ((c >> 2) & 1);
    EXPECT_NEAR(a[c], b[r], 1e-12);
  }
}

TEST(DetailedBalance, ClosedFormIsReversible) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  for (const Box& box : {Box({1, 1}), Box({2, 2}), Box({3, 3})}) {
    for (int rep = 0; rep < 3; ++rep) {
      const PcaParams p(2.0 * (1 - u(rng)), 2 * u(rng) - 1, random_range1(rng));
      for (const auto& bc : {BoundaryCondition::plus(), BoundaryCondition::minus(), BoundaryCondition::random(box, 2, rng),
                             BoundaryCondition::periodic()}) {
        const TransitionMatrix P = build_matrix(TransitionContext(p, box, bc));
        const Distribution nu = stationary_table(box, bc, p);
        EXPECT_LE(detailed_balance_residual(P, nu), 1e-12);
        EXPECT_LE(total_variation(push_forward(nu, P), nu), 1e-12);
      }
    }
  }
}

TEST(DetailedBalance, SymmetricTwoStateChain) {
  const Box box({1});
  const TransitionMatrix P(box, {0.7, 0.3, 0.3, 0.7});
  EXPECT_EQ(detailed_balance_residual(P, Distribution::uniform(box)), 0.0);
}

TEST(DetailedBalance, PerturbedNuIsDetected) {
  std::mt19937_64 rng(6);
  const Box box({2, 2});
  const PcaParams p(1.0, 0.3, random_range1(rng));
  const auto bc = BoundaryCondition::random(box, 2, rng);
  const TransitionMatrix P = build_matrix(TransitionContext(p, box, bc));
  Distribution nu = stationary_table(box, bc, p);
  nu.p[std::max_element(nu.p.begin(), nu.p.end()) - nu.p.begin()] *= 1.01;
  const double z = nu.sum();
  for (double& v : nu.p) v /= z;
  EXPECT_GT(detailed_balance_residual(P, nu), 1e-4);
}

TEST(DetailedBalance, RejectsNonPositiveNu) {
  const Box box({1});
  const TransitionMatrix P(box, {0.7, 0.3, 0.3, 0.7});
  EXPECT_THROW(detailed_balance_residual(P, Distribution::point_mass(box, 0)), Error);
}

TEST(RelativeEntropy, Examples) {
  const Box box({1});
  EXPECT_EQ(relative_entropy(Distribution::uniform(box), Distribution::uniform(box)), 0.0);
  EXPECT_NEAR(relative_entropy(Distribution::point_mass(box, 1), Distribution::uniform(box)), std::log(2.0), 1e-15);
  const double expected = 0.75 * std::log(1.5) + 0.25 * std::log(0.5);
  EXPECT_NEAR(relative_entropy(Distribution(box, {0.75, 0.25}), Distribution::uniform(box)), expected, 1e-15);
  EXPECT_NEAR(expected, 0.130812, 1e-6);
  EXPECT_THROW(relative_entropy(Distribution::uniform(box), Distribution::point_mass(box, 0)), Error);
}

TEST(RelativeEntropy, NonNegativeAndZeroOnlyAtEquality) {
  std::mt19937_64 rng(7);
  const Box box({2, 2});
  for (int rep = 0; rep < 50; ++rep) {
    const Distribution a = random_distribution(box, rng), b = random_distribution(box, rng);
    EXPECT_GT(relative_entropy(a, b), 0.0);
    EXPECT_NEAR(relative_entropy(a, a), 0.0, 1e-15);
  }
}

TEST(BackwardKernel, ReversiblePairGivesP) {
  std::mt19937_64 rng(8);
  const Box box({2, 2});
  const PcaParams p(1.0, -0.2, random_range1(rng));
  const auto bc = BoundaryCondition::random(box, 2, rng);
  const TransitionMatrix P = build_matrix(TransitionContext(p, box, bc));
  const TransitionMatrix B = backward_kernel(P, stationary_table(box, bc, p));
  for (std::size_t a = 0; a < P.states(); ++a)
    for (std::size_t b = 0; b < P.states(); ++b) EXPECT_NEAR(B.at(a, b), P.at(a, b), 1e-12);
}

TEST(BackwardKernel, PointMassAndBayes) {
  std::mt19937_64 rng(9);
  const Box box({2, 2});
  const TransitionMatrix P = build_matrix(torus_ctx(box, 0.9, rng));
  const TransitionMatrix B = backward_kernel(P, Distribution::point_mass(box, 6));
  for (std::size_t s = 0; s < P.states(); ++s) EXPECT_NEAR(B.at(s, 6), 1.0, 1e-15);

  const Distribution nu = random_distribution(box, rng);
  const TransitionMatrix Bn = backward_kernel(P, nu);
  const Distribution pnu = push_forward(nu, P);
  EXPECT_LE(Bn.max_row_sum_error(), 1e-12);
  for (std::size_t s = 0; s < P.states(); ++s)
    for (std::size_t e = 0; e < P.states(); ++e) EXPECT_NEAR(Bn.at(s, e) * pnu[s], P.at(e, s) * nu[e], 1e-15);

  // Reversing the reversal recovers P.
  const TransitionMatrix BB = backward_kernel(Bn, pnu);
  for (std::size_t e = 0; e < P.states(); ++e)
    for (std::size_t s = 0; s < P.states(); ++s) EXPECT_NEAR(BB.at(e, s), P.at(e, s), 1e-12);
}

TEST(EntropyProduction, IdentityOnTorus) {
  std::mt19937_64 rng(10);
  const Box box({2, 2});
  const TransitionMatrix P = build_matrix(torus_ctx(box, 0.9, rng));
  const Distribution mu = stationary_distribution(P);
  const auto zero = entropy_production(mu, P, mu);
  EXPECT_NEAR(zero.lhs, 0.0, 1e-13);
  EXPECT_NEAR(zero.rhs, 0.0, 1e-13);
  for (int rep = 0; rep < 10; ++rep) {
    const auto ep = entropy_production(random_distribution(box, rng), P, mu);
    EXPECT_NEAR(ep.lhs, ep.rhs, 1e-10);
    EXPECT_GE(ep.lhs, 0.0);
    EXPECT_GE(ep.rhs, 0.0);
  }
}

TEST(EntropyProduction, RejectsNonStationaryReference) {
  std::mt19937_64 rng(11);
  const Box box({2, 2});
  const TransitionMatrix P = build_matrix(torus_ctx(box, 0.9, rng));
  EXPECT_THROW(entropy_production(Distribution::uniform(box), P, random_distribution(box, rng)), Error);
}

TEST(EntropyProduction, KlIsNonIncreasing) {
  std::mt19937_64 rng(12);
  const Box box({2, 2});
  const TransitionMatrix P = build_matrix(torus_ctx(box, 1.5, rng));
  const Distribution mu = stationary_distribution(P);
  for (int rep = 0; rep < 5; ++rep) {
    Distribution nu = rep == 0 ? Distribution::point_mass(box, 0) : random_distribution(box, rng);
    double prev = relative_entropy(nu, mu);
    for (int t = 0; t < 50; ++t) {
      nu = push_forward(nu, P);
      const double cur = relative_entropy(nu, mu);
      EXPECT_LE(cur, prev + 1e-15);
      prev = cur;
    }
  }
}

TEST(Ising, CorrespondenceHolds) {
  const Box box({3, 3});
  for (const auto& [k1, k2] : {std::pair{1.0, 1.0}, std::pair{1.0, 0.3}}) {
    const PcaParams p(0.7, 0.0, CouplingKernel::nearest_neighbour(0, k1, k2));
    const auto r = ising_correspondence_check(box, BoundaryCondition::plus(), p);
    EXPECT_LE(r.marginal_deviation, 1e-12);
    EXPECT_LE(r.factorization_defect, 1e-12);
  }
}

TEST(Ising, EvenMarginalOfIsingEqualsEvenMarginalOfNu) {
  std::mt19937_64 rng(13);
  const Box box({3, 3});
  const auto bc = BoundaryCondition::random(box, 2, rng);
  const PcaParams p(0.9, 0.0, CouplingKernel::nearest_neighbour(0, 0.8, -0.6));
  const Distribution rho = ising_table(box, bc, p.beta, 0.8, -0.6);
  const Distribution nu = stationary_table(box, bc, p);
  const auto [even, odd] = sublattice_indices(box);
  std::size_t me = 0;
  for (std::size_t i : even) me |= std::size_t{1} << i;
  std::vector<double> a(rho.states(), 0.0), b(rho.states(), 0.0);
  for (std::size_t c = 0; c < rho.states(); ++c) {
    a[c & me] += rho[c];
    b[c & me] += nu[c];
  }
  for (std::size_t c = 0; c < rho.states(); ++c) EXPECT_NEAR(a[c], b[c], 1e-12);
  EXPECT_LE(ising_correspondence_check(box, bc, p).marginal_deviation, 1e-12);
}

TEST(Ising, ControlFailsIndependence) {
  const Box box({3, 3});
  const PcaParams p(0.3, 0.0, CouplingKernel::nearest_neighbour(0.5, 1, 1));
  EXPECT_GT(factorization_defect(stationary_table(box, BoundaryCondition::plus(), p)), 1e-3);
  EXPECT_THROW(ising_correspondence_check(box, BoundaryCondition::plus(), p), Error);
}

TEST(Transform, StationaryLawOfTransformedDynamicsIsTheImage) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> w(-1, 1);
  for (const Box& box : {Box({2, 2}), Box({2, 4})}) {
    for (int tag : {2, 3}) {
      const auto k = CouplingKernel::nearest_neighbour(w(rng), w(rng), w(rng));
      const auto t = transform_model(tag, k);
      const Distribution nu = stationary_distribution(build_matrix(TransitionContext(PcaParams(0.8, 0.0, k), box, BoundaryCondition::periodic())));
      const Distribution nu_star =
          stationary_distribution(build_matrix(TransitionContext(PcaParams(0.8, 0.0, t.kernel()), box, BoundaryCondition::periodic())));
      for (std::uint64_t c = 0; c < nu.states(); ++c)
        EXPECT_NEAR(nu[c], nu_star[t.apply(SpinConfig::decode(box, c)).encode()], 1e-10);
    }
  }
}

TEST(VerifySuite, InstancesAreReproducibleAndCsvSafe) {
  const auto a = randomized_instances(5), b = randomized_instances(5);
  ASSERT_EQ(a.size(), 20u);
  bool periodic = false, fixed = false;
  for (std::size_t n = 0; n < a.size(); ++n) {
    EXPECT_EQ(a[n].descriptor(), b[n].descriptor());
    EXPECT_EQ(a[n].descriptor().find(','), std::string::npos);
    EXPECT_LE(a[n].box.size(), 9u);
    EXPECT_GT(a[n].params.beta, 0.0);
    EXPECT_LE(a[n].params.beta, 2.0);
    EXPECT_LE(std::abs(a[n].params.h), 1.0);
    (a[n].bc.is_periodic() ? periodic : fixed) = true;
  }
  EXPECT_TRUE(periodic && fixed);
}

TEST(VerifySuite, FilterAndCeiling) {
  SuiteOptions opt;
  opt.only = {"stationarity"};
  const auto rows = exact_suite(opt);
  EXPECT_EQ(rows.size(), 20u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.check, "stationarity");
    EXPECT_TRUE(r.pass);
  }
  opt.only = {"nonsense"};
  EXPECT_THROW(exact_suite(opt), Error);
  const ExactInstance big{Box({4, 4}), BoundaryCondition::periodic(), PcaParams(1.0, 0.0, CouplingKernel::nearest_neighbour(0, 1, 1))};
  SuiteOptions small;
  try {
    instance_checks(big, small);
    FAIL() << "expected a ceiling error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("exact ceiling"), std::string::npos);
  }
}

TEST(VerifySuite, CsvLayout) {
  std::ostringstream os;
  write_check_csv(os, {{"two-route", "box=2x2", 1.5e-15, 1e-12, false, true}});
  EXPECT_EQ(os.str(), "check_name,instance_descriptor,residual,pass\ntwo-route,box=2x2,1.500000e-15,true\n");
}
