#include "qnet/topology.hpp"

#include <gtest/gtest.h>

#include <random>

#include "qnet/scenarios.hpp"

namespace qnet {
namespace {

// The worked example labels nodes 1..4; here they are 0..3, so its pair
// (3,4) is Pair(2,3), (2,4) is Pair(1,3), and so on.
const Pair p12(0, 1), p13(0, 2), p14(0, 3), p23(1, 2), p24(1, 3), p34(2, 3);

TEST(SelectTopology, ExampleFirstStepEqualWeights) {
  const auto skr = *n4_example_config().direct_skr;
  const WeightMatrix w(4, 1.0 / 10.0);
  const auto t = select_topology(w, skr, 2);
  EXPECT_EQ(t, Topology::from_edges({p34, p24}, 4, 2));
  EXPECT_EQ(select_topology_exhaustive(w, skr, 2), t);
}

TEST(SelectTopology, ExampleSecondStepProportionalFair) {
  const auto skr = *n4_example_config().direct_skr;
  SymMatrix xbar(4, 10.0);
  xbar[p34] = 305.0;
  xbar[p24] = 255.0;
  WeightMatrix w(4);
  for (std::size_t k = 0; k < w.pairs(); ++k) w.values()[k] = 1.0 / xbar.values()[k];
  // scores: (3,4) 600/305, (2,4) 500/255, (2,3) 40, (1,4) 30, (1,3) 20, (1,2) 10
  const auto t = select_topology(w, skr, 2);
  EXPECT_EQ(t, Topology::from_edges({p23, p14}, 4, 2));
  EXPECT_EQ(select_topology_exhaustive(w, skr, 2), t);
}

TEST(SelectTopology, CapacityNotBinding) {
  SymMatrix skr(4, 1.0);
  skr[p12] = 0.0;
  skr[p34] = 0.0;
  const auto t = select_topology(WeightMatrix(4, 1.0), skr, 6);
  EXPECT_EQ(t, Topology::from_edges({p13, p14, p23, p24}, 4, 6));
}

TEST(SelectTopology, TiesFollowCanonicalOrder) {
  const auto t = select_topology(WeightMatrix(4, 1.0), SymMatrix(4, 3.0), 2);
  EXPECT_EQ(t, Topology::from_edges({p12, p13}, 4, 2));
}

TEST(EnumerateFeasible, Counts) {
  EXPECT_EQ(enumerate_feasible(4, 2).size(), 22u);
  EXPECT_EQ(enumerate_feasible(5, 2).size(), 56u);
  const auto two = enumerate_feasible(2, 1);
  ASSERT_EQ(two.size(), 2u);
  EXPECT_TRUE(two[0].empty());
  EXPECT_EQ(two[1], Topology::from_edges({Pair(0, 1)}, 2, 1));
  EXPECT_EQ(feasible_count(4, 2), 22u);
}

TEST(EnumerateFeasible, EachTopologyOnce) {
  auto all = enumerate_feasible(5, 3);
  EXPECT_EQ(all.size(), 1u + 10u + 45u + 120u);
  std::vector<std::vector<Pair>> edges;
  for (const auto& t : all) {
    EXPECT_LE(t.size(), 3u);
    edges.push_back(t.edges());
  }
  std::sort(edges.begin(), edges.end());
  EXPECT_EQ(std::adjacent_find(edges.begin(), edges.end()), edges.end());
}

TEST(EnumerateFeasible, Guard) {
  EXPECT_THROW(enumerate_feasible(20, 6), ValidationError);
  EXPECT_THROW(select_topology_exhaustive(WeightMatrix(20, 1.0), SymMatrix(20, 1.0), 6), ValidationError);
}

TEST(SelectTopologyExhaustive, ZeroWeightsGiveEmpty) {
  const auto skr = *n4_example_config().direct_skr;
  EXPECT_TRUE(select_topology_exhaustive(WeightMatrix(4, 0.0), skr, 2).empty());
  EXPECT_TRUE(select_topology(WeightMatrix(4, 0.0), skr, 2).empty());
}

SymMatrix random_matrix(std::size_t n, std::mt19937_64& gen, bool sparse, bool coarse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SymMatrix m(n);
  for (double& v : m.values()) {
    v = coarse ? static_cast<double>(gen() % 4) : u(gen);
    if (sparse && gen() % 4 == 0) v = 0.0;
  }
  return m;
}

TEST(SelectTopologyProperty, FastPathMatchesExhaustive) {
  std::mt19937_64 gen(123);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 5;  // 2..6
    const std::size_t cap = 1 + gen() % 3;
    // coarse integer values exercise ties
    const bool coarse = trial % 3 == 0;
    const auto w = random_matrix(n, gen, trial % 2 == 0, coarse);
    const auto s = random_matrix(n, gen, trial % 5 == 0, coarse);
    const auto fast = select_topology(w, s, cap);
    EXPECT_EQ(fast, select_topology_exhaustive(w, s, cap)) << "trial " << trial;
    EXPECT_LE(fast.size(), cap);
    for (Pair p : fast.edges()) EXPECT_GT(w[p] * s[p], 0.0);
  }
}

TEST(SelectTopologyProperty, ScaleInvariance) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> lambda(0.01, 100.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + gen() % 6;
    const std::size_t cap = 1 + gen() % 4;
    auto w = random_matrix(n, gen, true, false);
    const auto s = random_matrix(n, gen, false, false);
    const auto before = select_topology(w, s, cap);
    const double l = lambda(gen);
    for (double& v : w.values()) v *= l;
    EXPECT_EQ(select_topology(w, s, cap), before);
  }
}

}  // namespace
}  // namespace qnet
