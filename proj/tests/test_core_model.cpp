#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "pca/pca.hpp"

using namespace pca;

TEST(Box, EnumerationIsLexicographicAndTotal) {
  const Box box({2, 3}, Site{-1, 4});
  ASSERT_EQ(box.size(), 6u);
  std::vector<Site> seen = box.sites();
  EXPECT_EQ(seen.front(), (Site{-1, 4}));
  EXPECT_EQ(seen[1], (Site{-1, 5}));
  EXPECT_EQ(seen.back(), (Site{0, 6}));
  EXPECT_TRUE(std::is_sorted(seen.begin(), seen.end()));
  for (std::size_t i = 0; i < box.size(); ++i) EXPECT_EQ(*box.index_of(box.site(i)), i);
  EXPECT_FALSE(box.index_of(Site{1, 4}));
}

TEST(Box, ClosureSupAndEuclidean) {
  const Box box({1, 1});
  EXPECT_EQ(box.closure(1).size(), 9u);
  EXPECT_EQ(box.closure(1, DistanceNorm::euclidean).size(), 5u);
  EXPECT_EQ(Box({3, 3}).closure(2).size(), 49u);
}

TEST(Box, RejectsBadSides) { EXPECT_THROW(Box({2, 0}), Error); }

TEST(Kernel, AsymmetricKernelFails) {
  EXPECT_THROW(CouplingKernel(2, {{Site{1, 0}, 1.0}}), Error);
  EXPECT_THROW(CouplingKernel(2, {{Site{1, 0}, 1.0}, {Site{-1, 0}, 0.5}}), Error);
  EXPECT_NO_THROW(CouplingKernel(2, {{Site{1, 0}, 1.0}, {Site{-1, 0}, 1.0}}));
}

TEST(Kernel, SymmetricCompletionAndRange) {
  const auto k = CouplingKernel::symmetric_completion(2, {{Site{1, 1}, 0.5}, {Site{0, 0}, 2.0}});
  EXPECT_EQ(k.at({-1, -1}), 0.5);
  EXPECT_EQ(k.range(), 1);
  EXPECT_EQ(k.range(DistanceNorm::euclidean), 2);
  EXPECT_DOUBLE_EQ(k.total(), 3.0);
  EXPECT_THROW(CouplingKernel::symmetric_completion(2, {{Site{1, 0}, 1.0}, {Site{-1, 0}, 2.0}}), Error);
}

TEST(Params, BetaMustBePositive) {
  EXPECT_THROW(PcaParams(0.0, 0.0, CouplingKernel::zero(2)), Error);
  EXPECT_THROW(PcaParams(-1.0, 0.0, CouplingKernel::zero(2)), Error);
}

TEST(Extend, PeriodicWrap) {
  const SpinConfig c(Box({2, 2}), Spin{1});
  const auto per = BoundaryCondition::periodic();
  EXPECT_EQ(extend(c, per)(Site{2, 0}), 1);
  SpinConfig d = c;
  d.set({0, 1}, -1);
  EXPECT_EQ(extend(d, per)(Site{2, -1}), -1);
}

TEST(Extend, FixedReadsTau) {
  const SpinConfig c(Box({1}), Spin{1});
  const auto minus = BoundaryCondition::minus();
  EXPECT_EQ(extend(c, minus)(Site{1}), -1);
  EXPECT_EQ(extend(c, minus)(Site{0}), 1);
}

TEST(Extend, MissingBoundarySpin) {
  const Box box({2, 2});
  const SpinConfig c(box);
  const auto bc = BoundaryCondition::fixed({{Site{-1, 0}, 1}});
  EXPECT_EQ(extend(c, bc)(Site{-1, 0}), 1);
  EXPECT_THROW(extend(c, bc)(Site{2, 0}), Error);
  EXPECT_THROW(bc.require_coverage(box, 1), Error);
  const auto k = CouplingKernel::nearest_neighbour(0, 1, 1);
  EXPECT_THROW(TransitionContext(PcaParams(1, 0, k), box, bc), Error);
}

TEST(Extend, IdentityOnLambdaForAnyBc) {
  std::mt19937_64 rng(5);
  const Box box({3, 2});
  for (int rep = 0; rep < 20; ++rep) {
    const SpinConfig c = SpinConfig::random(box, rng);
    for (const auto& bc : {BoundaryCondition::periodic(), BoundaryCondition::plus(), BoundaryCondition::random(box, 2, rng)})
      for (std::size_t i = 0; i < box.size(); ++i) EXPECT_EQ(extend(c, bc)(box.site(i)), c[i]);
  }
}

TEST(LocalField, NearestNeighbourExamples) {
  const auto k = CouplingKernel::nearest_neighbour(0, 1, 1);
  const SpinConfig c(Box({3, 3}), Spin{1});
  const auto per = BoundaryCondition::periodic();
  EXPECT_DOUBLE_EQ(local_field({1, 1}, extend(c, per), PcaParams(1, 0, k)), 4.0);
  EXPECT_DOUBLE_EQ(local_field({1, 1}, extend(c, per), PcaParams(1, 0.5, k)), 4.5);
  EXPECT_DOUBLE_EQ(local_field({1, 1}, extend(c, per), PcaParams(1, 0, CouplingKernel::zero(2))), 0.0);
  EXPECT_THROW(local_field({5, 1}, extend(c, per), PcaParams(1, 0, k)), Error);
}

TEST(LocalField, ShiftInvarianceOnTorus) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> w(-1, 1);
  const Box box({4, 3});
  const auto per = BoundaryCondition::periodic();
  for (int rep = 0; rep < 10; ++rep) {
    const auto k = CouplingKernel::symmetric_completion(
        2, {{Site{0, 0}, w(rng)}, {Site{1, 0}, w(rng)}, {Site{0, 1}, w(rng)}, {Site{1, 1}, w(rng)}, {Site{2, -1}, w(rng)}});
    const PcaParams p(0.7, w(rng), k);
    const SpinConfig c = SpinConfig::random(box, rng);
    for (std::size_t n = 0; n < box.size(); ++n) {
      const Site i = box.site(n);
      const SpinConfig shifted = c.shifted(i);
      EXPECT_NEAR(local_field(i, extend(c, per), p), local_field({0, 0}, extend(shifted, per), p), 1e-14);
    }
  }
}

TEST(Sublattices, ParityPartition) {
  const auto s2 = sublattices(Box({2, 2}));
  EXPECT_EQ(s2.even, (std::vector<Site>{{0, 0}, {1, 1}}));
  EXPECT_EQ(s2.odd, (std::vector<Site>{{0, 1}, {1, 0}}));
  const auto s1 = sublattices(Box({1, 1}));
  EXPECT_EQ(s1.even.size(), 1u);
  EXPECT_TRUE(s1.odd.empty());
  const auto s3 = sublattices(Box({3, 3}));
  EXPECT_EQ(s3.even.size(), 5u);
  EXPECT_EQ(s3.odd.size(), 4u);
  EXPECT_THROW(sublattices(Box({3})), Error);
}

TEST(SpinConfig, CanonicalEncodingRoundTripsExhaustively) {
  for (const Box& box : {Box({12}), Box({3, 4}), Box({2, 2, 3})}) {
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << box.size()); ++code) {
      const SpinConfig c = SpinConfig::decode(box, code);
      ASSERT_EQ(c.encode(), code);
      ASSERT_EQ(SpinConfig::decode(box, c.encode()), c);
    }
  }
}

TEST(SpinConfig, BitOneMeansPlus) {
  const Box box({2, 2});
  const SpinConfig c = SpinConfig::decode(box, 0b0001);
  EXPECT_EQ(c.at({0, 0}), 1);
  EXPECT_EQ(c.at({0, 1}), -1);
  EXPECT_EQ(SpinConfig(box, Spin{1}).encode(), 0b1111u);
}

TEST(ModelSpec, ParsesKeysAndCompletesKernel) {
  std::istringstream in("# demo\ndim = 2\nsides = 3x3\nbeta = 0.7\nh = 0.1\nk.1.0 = 1\nk.0.1 = 0.3\nbc = periodic\n");
  ModelSpec spec = ModelSpec::parse(in);
  EXPECT_EQ(spec.box(), Box({3, 3}));
  const PcaParams p = spec.params();
  EXPECT_DOUBLE_EQ(p.beta, 0.7);
  EXPECT_DOUBLE_EQ(p.h, 0.1);
  EXPECT_DOUBLE_EQ(p.kernel.at({-1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(p.kernel.at({0, -1}), 0.3);
  EXPECT_DOUBLE_EQ(p.kernel.at({0, 0}), 0.0);
  EXPECT_TRUE(spec.boundary().is_periodic());
  spec.set("k.0.0=0.5");
  spec.set("bc=minus");
  EXPECT_DOUBLE_EQ(spec.params().kernel.at({0, 0}), 0.5);
  EXPECT_EQ(spec.boundary(), BoundaryCondition::minus());
}

TEST(ModelSpec, Errors) {
  std::istringstream bad_key("colour = blue\n");
  EXPECT_THROW(ModelSpec::parse(bad_key), Error);
  std::istringstream bad_num("beta = hot\n");
  EXPECT_THROW(ModelSpec::parse(bad_num).params(), Error);
  std::istringstream asym("k.1.0 = 1\nk.-1.0 = 2\n");
  EXPECT_THROW(ModelSpec::parse(asym).kernel(), Error);
  EXPECT_THROW(ModelSpec::load("/nonexistent/model.txt"), Error);
  ModelSpec spec;
  spec.set("bc=file:/nonexistent/tau.txt");
  EXPECT_THROW(spec.boundary(), Error);
}

TEST(Grid, ReadWrite) {
  std::istringstream in("+-+\n--+\n");
  const SpinConfig c = read_grid(in);
  EXPECT_EQ(c.box(), Box({3, 2}));
  EXPECT_EQ(c.at({1, 0}), -1);
  EXPECT_EQ(c.at({2, 1}), 1);
  std::ostringstream out;
  write_grid(out, c);
  EXPECT_EQ(out.str(), "+-+\n--+\n");
  std::istringstream bad("+x\n");
  EXPECT_THROW(read_grid(bad), Error);
}
