#include "qnet/scheduler.hpp"

#include <gtest/gtest.h>

#include <random>

#include "qnet/scenarios.hpp"

namespace qnet {
namespace {

const Pair p12(0, 1), p13(0, 2), p14(0, 3), p23(1, 2), p24(1, 3), p34(2, 3);

ChannelProcess fixed_nominal(const NetworkConfig& cfg) {
  return ChannelProcess::fixed(ChannelState{cfg.nominal_qber(), "nominal"});
}

std::vector<TraceRecord> example_run(const Strategy& s, std::size_t horizon) {
  const auto cfg = n4_example_config();
  RunOptions opt;
  opt.strategy = s;
  opt.schedule = StepSchedule::fixed(0.5);
  opt.horizon = horizon;
  opt.xbar_init = 10.0;
  return run(cfg, opt, fixed_nominal(cfg));
}

TEST(GradientWeights, PerStrategy) {
  SymMatrix x(3, 10.0);
  SymMatrix s(3, 400.0);
  s.set(1, 2, 0.0);
  const auto pf = gradient_weights(ProportionalFair{}, x, s);
  EXPECT_DOUBLE_EQ(pf(0, 1), 0.1);
  const auto rr = gradient_weights(RoundRobin{}, x, s);
  EXPECT_DOUBLE_EQ(rr(0, 1), 1.0 / 4000.0);
  EXPECT_DOUBLE_EQ(rr(0, 1) * s(0, 1), 1.0 / x(0, 1));
  EXPECT_EQ(rr(1, 2), 0.0);  // S = 0 is ineligible
  const auto g = gradient_weights(Greedy{}, x, s);
  for (double v : g.values()) EXPECT_EQ(v, 1.0);
}

TEST(GradientWeights, AlphaFamilyEndpoints) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.1, 1e5);
  for (int trial = 0; trial < 100; ++trial) {
    SymMatrix x(5), s(5);
    for (double& v : x.values()) v = u(gen);
    for (double& v : s.values()) v = u(gen);
    const auto a1 = gradient_weights(AlphaFair{1.0}, x, s);
    const auto pf = gradient_weights(ProportionalFair{}, x, s);
    const auto a0 = gradient_weights(AlphaFair{0.0}, x, s);
    const auto gr = gradient_weights(Greedy{}, x, s);
    for (std::size_t k = 0; k < x.pairs(); ++k) {
      EXPECT_DOUBLE_EQ(a1.values()[k], pf.values()[k]);
      EXPECT_EQ(a0.values()[k], gr.values()[k]);
    }
  }
}

TEST(GradientWeights, RejectsNonPositiveAverage) {
  SymMatrix x(3, 1.0);
  x.set(0, 2, 0.0);
  EXPECT_THROW(gradient_weights(ProportionalFair{}, x, SymMatrix(3, 1.0)), ValidationError);
}

TEST(UpdateAverage, WorkedExampleArithmetic) {
  EXPECT_EQ(update_average(10, 600, 0.5), 305.0);
  EXPECT_EQ(update_average(10, 500, 0.5), 255.0);
  EXPECT_EQ(update_average(255, 500, 0.5), 377.5);
  EXPECT_EQ(update_average(305, 600, 0.5), 452.5);
  EXPECT_EQ(update_average(42.0, 42.0, 0.3), 42.0);
  EXPECT_EQ(update_average(1e-3, 0.0, 0.5, 1e-2), 1e-2);
}

TEST(Metrics, SpotValues) {
  const auto eq = metrics(SymMatrix(5, 3.5));
  EXPECT_DOUBLE_EQ(eq.jain, 1.0);
  EXPECT_DOUBLE_EQ(eq.geo_mean, 3.5);
  EXPECT_DOUBLE_EQ(eq.total, 35.0);

  const std::vector<double> two{4.0, 9.0};
  EXPECT_DOUBLE_EQ(metrics(two).geo_mean, 6.0);

  // canonical order (1,2),(1,3),(1,4),(2,3),(2,4),(3,4)
  const std::vector<double> after_pf{10, 10, 10, 10, 255, 305};
  EXPECT_NEAR(metrics(after_pf).log_sum, 20.47191569374202, 1e-12);
  EXPECT_THROW(metrics(std::vector<double>{1.0, 0.0}), ValidationError);
}

TEST(ParseTokens, StrategiesAndSchedules) {
  EXPECT_TRUE(std::holds_alternative<ProportionalFair>(parse_strategy("pf")));
  EXPECT_TRUE(std::holds_alternative<RoundRobin>(parse_strategy("rr")));
  EXPECT_EQ(std::get<AlphaFair>(parse_strategy("alpha:2.5")).alpha, 2.5);
  EXPECT_EQ(to_string(parse_strategy("alpha:2.5")), "alpha:2.5");
  EXPECT_THROW(parse_strategy("alpha:-1"), ValidationError);
  EXPECT_THROW(parse_strategy("alpha:x"), ValidationError);
  EXPECT_THROW(parse_strategy("fair"), ValidationError);
  EXPECT_TRUE(parse_schedule("harmonic").is_harmonic());
  EXPECT_EQ(parse_schedule("fixed:0.25").gamma(7), 0.25);
  EXPECT_DOUBLE_EQ(StepSchedule::harmonic().gamma(3), 0.25);
  EXPECT_THROW(parse_schedule("fixed:0"), ValidationError);
  EXPECT_THROW(parse_schedule("fixed:1.5"), ValidationError);
  EXPECT_THROW(parse_schedule("fixed:"), ValidationError);
}

TEST(Run, WorkedExampleProportionalFair) {
  const auto tr = example_run(ProportionalFair{}, 2);
  ASSERT_EQ(tr.size(), 3u);
  EXPECT_EQ(tr[0].xbar, SymMatrix(4, 10.0));
  EXPECT_EQ(tr[1].selected, Topology::from_edges({p34, p24}, 4, 2));
  EXPECT_EQ(tr[1].xbar[p34], 305.0);
  EXPECT_EQ(tr[1].xbar[p24], 255.0);
  EXPECT_EQ(tr[1].xbar[p12], 5.0);  // unserved pairs decay with gamma
  EXPECT_EQ(tr[2].selected, Topology::from_edges({p23, p14}, 4, 2));
  EXPECT_EQ(tr[1].served, (std::vector<double>{500.0, 600.0}));
}

TEST(Run, WorkedExampleGreedyIsStationary) {
  const auto tr = example_run(Greedy{}, 50);
  for (std::size_t t = 1; t < tr.size(); ++t)
    EXPECT_EQ(tr[t].selected, Topology::from_edges({p34, p24}, 4, 2));
  EXPECT_EQ(tr[2].xbar[p24], 377.5);
  EXPECT_EQ(tr[2].xbar[p34], 452.5);
}

TEST(Run, UnconstrainedSourceServesEveryone) {
  auto cfg = n4_example_config();
  cfg.capacity = 6;
  RunOptions opt;
  opt.strategy = Greedy{};
  opt.horizon = 1;
  opt.xbar_init = 10.0;
  opt.schedule = StepSchedule::fixed(1.0);
  const auto tr = run(cfg, opt, fixed_nominal(cfg));
  EXPECT_EQ(tr[1].selected.size(), 6u);
  EXPECT_EQ(tr[1].xbar, *cfg.direct_skr);
}

TEST(Run, HarmonicRunningMeanIdentity) {
  const auto cfg = n5_network_config();
  for (const Strategy& s : {Strategy{ProportionalFair{}}, Strategy{RoundRobin{}}, Strategy{Greedy{}}}) {
    RunOptions opt;
    opt.strategy = s;
    opt.horizon = 1000;
    opt.seed = 17;
    const auto tr = run(cfg, opt, ChannelProcess::perturbation_walk({*cfg.base_qber, ""}, 0.005, 100));
    std::vector<double> served_sum(10, 0.0);
    for (std::size_t t = 1; t < tr.size(); ++t) {
      for (std::size_t e = 0; e < tr[t].selected.size(); ++e)
        served_sum[pair_index(tr[t].selected.edges()[e], cfg.n)] += tr[t].served[e];
      for (std::size_t k = 0; k < 10; ++k) {
        const double expected = (tr[0].xbar.values()[k] + served_sum[k]) / static_cast<double>(t + 1);
        ASSERT_NEAR(tr[t].xbar.values()[k], expected, 1e-9 * expected) << "t=" << t << " k=" << k;
      }
    }
  }
}

TEST(Run, ProportionalFairServesEveryPair) {
  const auto cfg = n5_network_config();
  RunOptions opt;
  opt.horizon = 10 * 10;
  const auto tr = run(cfg, opt, fixed_nominal(cfg));
  std::vector<bool> seen(10, false);
  for (const auto& r : tr)
    for (Pair p : r.selected.edges()) seen[pair_index(p, cfg.n)] = true;
  for (std::size_t k = 0; k < 10; ++k) EXPECT_TRUE(seen[k]) << "pair " << k;
}

TEST(Run, NeverServedPairsDecayGeometrically) {
  const auto cfg = n5_network_config();
  for (const StepSchedule sched : {StepSchedule::harmonic(), StepSchedule::fixed(0.05)}) {
    RunOptions opt;
    opt.strategy = Greedy{};
    opt.schedule = sched;
    opt.horizon = 300;
    opt.xbar_init = 10.0;
    const auto tr = run(cfg, opt, fixed_nominal(cfg));
    double factor = 1.0;
    const double floor = kFloorFraction * skr_if_pumped(cfg, {*cfg.base_qber, ""}).max();
    for (std::size_t t = 1; t < tr.size(); ++t) {
      factor *= 1.0 - sched.gamma(t);
      const double expected = std::max(10.0 * factor, floor);
      EXPECT_NEAR(tr[t].xbar(0, 1), expected, 1e-12 * 10.0);
      // served pairs still climb toward S during the first few steps
      if (t > tr[0].xbar.pairs()) {
        EXPECT_LT(tr[t].metrics.log_sum, tr[t - 1].metrics.log_sum);
      }
    }
  }
}

TEST(Run, TraceIsDeterministicPerSeed) {
  const auto cfg = n5_network_config();
  auto go = [&](std::uint64_t seed) {
    RunOptions opt;
    opt.horizon = 500;
    opt.seed = seed;
    return run(cfg, opt, ChannelProcess::perturbation_walk({*cfg.base_qber, ""}, 0.005, 50));
  };
  const auto a = go(3), b = go(3), c = go(4);
  ASSERT_EQ(a.size(), b.size());
  bool differs = false;
  for (std::size_t t = 0; t < a.size(); ++t) {
    EXPECT_EQ(a[t].xbar, b[t].xbar);
    EXPECT_EQ(a[t].selected, b[t].selected);
    EXPECT_EQ(a[t].channel_id, b[t].channel_id);
    differs |= a[t].xbar != c[t].xbar;
  }
  EXPECT_TRUE(differs);
}

TEST(Run, FinalOnlyKeepsEndpoints) {
  const auto cfg = n5_network_config();
  RunOptions opt;
  opt.horizon = 200;
  const auto full = run(cfg, opt, fixed_nominal(cfg));
  opt.final_only = true;
  const auto brief = run(cfg, opt, fixed_nominal(cfg));
  ASSERT_EQ(brief.size(), 2u);
  EXPECT_EQ(brief.back().xbar, full.back().xbar);
  EXPECT_EQ(brief.back().t, 200u);
}

TEST(Run, RejectsBadInput) {
  const auto cfg = n5_network_config();
  RunOptions opt;
  opt.horizon = 0;
  EXPECT_THROW(run(cfg, opt, fixed_nominal(cfg)), ValidationError);
  opt.horizon = 5;
  opt.xbar_init = -1.0;
  EXPECT_THROW(run(cfg, opt, fixed_nominal(cfg)), ValidationError);
}

TEST(Run, DefaultInitialAverageScalesWithMaxRate) {
  const auto cfg = n5_network_config();
  RunOptions opt;
  opt.horizon = 1;
  const auto tr = run(cfg, opt, fixed_nominal(cfg));
  EXPECT_NEAR(tr[0].xbar(0, 1), 1e-6 * 602302.6108048775, 1e-9);
}

}  // namespace
}  // namespace qnet
