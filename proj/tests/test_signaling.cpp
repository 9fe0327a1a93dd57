#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "collapse_box/error.hpp"
#include "collapse_box/signaling.hpp"

using namespace cbox;

namespace {

const Distribution kPrior = make_distribution({0.3, 0.7});

WitnessOptions options(std::uint64_t n = 20000, std::uint64_t seed = 42) {
  WitnessOptions o;
  o.sim.replicas = n;
  o.sim.seed = seed;
  o.sim.workers = 1;
  return o;
}

Distribution random_distribution(std::mt19937_64& rng, std::size_t k) {
  std::gamma_distribution<double> g(0.7, 1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = g(rng) + 1e-12;
  return make_distribution(w / w.sum(), 1e-9);
}

// Capacity of a binary-input channel by golden-section search on the input
// prior; mutual information is concave in it.
double capacity_by_search(const InducedChannel& ch) {
  auto mi = [&](double q) { return mutual_information(Eigen::Vector2d(q, 1.0 - q), ch); };
  double lo = 0.0, hi = 1.0;
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int i = 0; i < 200; ++i) {
    const double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
    if (mi(a) < mi(b)) lo = a;
    else hi = b;
  }
  return mi(0.5 * (lo + hi));
}

}  // namespace

TEST(Witness, InstantaneousIsNonSignaling) {
  const TwoBoxScenario scn(instantaneous_family(kPrior));
  for (double s : {0.0, 0.5, 3.0}) {
    const auto r = witness(scn, s, options());
    EXPECT_LE(r.tv_analytic, 1e-15);
    EXPECT_EQ(r.verdict, Verdict::non_signaling);
  }
}

TEST(Witness, AsymmetricHalfwaySignals) {
  const TwoBoxScenario scn(step_family(kPrior, {0.0, 1.0}));
  const auto r = witness(scn, 0.5, options(100000));
  EXPECT_NEAR(r.tv_analytic, 0.21, 1e-12);
  EXPECT_NEAR(r.analytic_probe[0], 0.51, 1e-12);
  EXPECT_TRUE(r.empirical_reject);
  EXPECT_EQ(r.verdict, Verdict::signaling);
  EXPECT_LE(r.ci_lo, 0.21);
  EXPECT_GE(r.ci_hi, 0.21);
}

TEST(Witness, AfterCollapseCompletesIsNonSignaling) {
  const TwoBoxScenario scn(linear_family(kPrior, {0.25, 1.0}));
  for (double s : {1.0, 1.5}) {
    const auto r = witness(scn, s, options());
    EXPECT_LE(r.tv_analytic, 1e-12);
    EXPECT_EQ(r.verdict, Verdict::non_signaling);
  }
}

TEST(Witness, SameSeedSameReport) {
  const TwoBoxScenario scn(linear_family(kPrior, {0.25, 1.0}));
  const auto a = witness(scn, 0.3, options(5000, 9));
  const auto b = witness(scn, 0.3, options(5000, 9));
  EXPECT_EQ(a.tv_empirical, b.tv_empirical);
  EXPECT_EQ(a.p_value, b.p_value);
}

TEST(Assess, SignalingNeedsAnalyticSupport) {
  // Empirical samples differ strongly but the analytic marginals agree.
  const auto r = assess(kPrior, kPrior, EmpiricalDist({300, 700}), EmpiricalDist({600, 400}), options());
  EXPECT_TRUE(r.empirical_reject);
  EXPECT_EQ(r.verdict, Verdict::non_signaling);
}

TEST(EmpiricalTv, IntervalContainsEstimate) {
  const auto t = empirical_tv(EmpiricalDist({300, 700}), EmpiricalDist({510, 490}));
  EXPECT_NEAR(t.value, 0.21, 1e-15);
  EXPECT_LT(t.lo, t.value);
  EXPECT_GT(t.hi, t.value);
  EXPECT_GE(t.lo, 0.0);
}

TEST(WitnessSweep, EndpointsAndOrder) {
  const TwoBoxScenario scn(linear_family(kPrior, {0.25, 1.0}));
  const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto reports = witness_sweep(scn, grid, options(5000));
  ASSERT_EQ(reports.size(), grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_EQ(reports[i].elapsed, grid[i]);
  EXPECT_LE(reports.front().tv_analytic, 1e-15);
  EXPECT_LE(reports.back().tv_analytic, 1e-12);
  EXPECT_GT(reports[2].tv_analytic, 0.0);
}

TEST(WitnessSweep, SinglePointAndEmptyGrid) {
  const TwoBoxScenario scn(step_family(kPrior, {0.0, 1.0}));
  const auto one = witness_sweep(scn, {0.5}, options(5000));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_NEAR(one[0].tv_analytic, 0.21, 1e-12);
  try {
    witness_sweep(scn, {}, options());
    FAIL() << "empty grid accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyGrid);
  }
}

TEST(WitnessSweep, WorkerCountDoesNotChangeResults) {
  const TwoBoxScenario scn(linear_family(kPrior, {0.25, 1.0}));
  auto a = options(4000);
  auto b = options(4000);
  b.sim.workers = 4;
  const auto ra = witness_sweep(scn, {0.1, 0.2, 0.3}, a);
  const auto rb = witness_sweep(scn, {0.1, 0.2, 0.3}, b);
  for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_EQ(ra[i].tv_empirical, rb[i].tv_empirical);
}

TEST(WindowWitness, FormulaSeesNothingWhenFastestCollapseIsInstant) {
  // The closed form only looks below the shortest duration, which is zero
  // here; the simulated marginal still moves by 0.105.
  const TwoBoxScenario scn(step_family(kPrior, {0.0, 1.0}));
  const WindowSpec w(1.0, TimeDensity::uniform());
  const auto r = window_witness(scn, w, options(100000));
  EXPECT_LE(r.tv_analytic, 1e-12);
  EXPECT_TRUE(r.empirical_reject);
  EXPECT_NEAR(r.tv_empirical, 0.105, 0.01);
  EXPECT_EQ(r.verdict, Verdict::non_signaling);
  EXPECT_NEAR(tv_distance(operational_window_marginal(scn, w), kPrior), 0.105, 1e-8);
}

TEST(WindowWitness, LinearFamilySignals) {
  const TwoBoxScenario scn(linear_family(kPrior, {0.25, 1.0}));
  const auto r = window_witness(scn, WindowSpec(1.0, TimeDensity::uniform()), options(100000));
  EXPECT_NEAR(r.tv_analytic, 0.33281249999999996 - 0.3, 1e-8);
  EXPECT_EQ(r.verdict, Verdict::signaling);
}

TEST(SingleBoxReport, ZeroAtTriggerInstant) {
  const auto f = linear_family(kPrior, {0.25, 1.0});
  EXPECT_LE(single_box_report(f, 0.0, options()).tv_analytic, 1e-15);
  EXPECT_GT(single_box_report(f, 0.3, options()).tv_analytic, 0.0);
}

TEST(Capacity, IdenticalRowsCarryNothing) {
  const InducedChannel ch(kPrior, kPrior);
  EXPECT_LE(channel_capacity(ch), 1e-12);
}

TEST(Capacity, NoiselessBitCarriesOneBit) {
  const InducedChannel ch(make_distribution({1.0, 0.0}), make_distribution({0.0, 1.0}));
  const auto r = blahut_arimoto(ch);
  EXPECT_NEAR(r.bits, 1.0, 1e-10);
  EXPECT_NEAR(r.optimal_prior(0), 0.5, 1e-6);
}

TEST(Capacity, ReferenceChannels) {
  EXPECT_NEAR(channel_capacity(InducedChannel(kPrior, make_distribution({0.51, 0.49}))), 0.033305870562986686, 1e-9);
  EXPECT_NEAR(channel_capacity(InducedChannel(make_distribution({0.2, 0.5, 0.3}), make_distribution({0.6, 0.1, 0.3}))),
              0.18069544367449503, 1e-9);
  EXPECT_NEAR(channel_capacity(InducedChannel(make_distribution({0.9, 0.1, 0.0, 0.0}),
                                              make_distribution({0.05, 0.15, 0.4, 0.4}))),
              0.7389323320639123, 1e-9);
  EXPECT_NEAR(channel_capacity(InducedChannel(make_distribution({0.5, 0.5}), make_distribution({0.0, 1.0}))),
              std::log2(1.25), 1e-9);
}

TEST(CapacityProperty, MatchesSearchAndStaysInRange) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + trial % 4;
    const InducedChannel ch(random_distribution(rng, k), random_distribution(rng, k));
    const double c = channel_capacity(ch);
    EXPECT_NEAR(c, capacity_by_search(ch), 1e-4);
    EXPECT_GE(c, -1e-12);
    EXPECT_LE(c, 1.0 + 1e-12);
  }
}

TEST(CapacityProperty, ZeroExactlyWhenRowsAgree) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_distribution(rng, 3);
    const auto q = random_distribution(rng, 3);
    EXPECT_LE(channel_capacity(InducedChannel(p, p)), 1e-12);
    if (tv_distance(p, q) > 1e-6) EXPECT_GT(channel_capacity(InducedChannel(p, q)), 0.0);
  }
}

TEST(CapacityProperty, WitnessAndCapacityVanishTogether) {
  const TwoBoxScenario scn(linear_family(kPrior, {0.25, 1.0}));
  for (double s : {0.0, 0.1, 0.3, 0.7, 1.0, 2.0}) {
    const auto x0 = bob_marginal(scn, 0, s);
    const auto x1 = bob_marginal(scn, 1, s);
    const double c = channel_capacity(InducedChannel(x0, x1));
    const double tv = tv_distance(x0, x1);
    EXPECT_EQ(tv <= 1e-12, c <= 1e-12) << "s=" << s << " tv=" << tv << " c=" << c;
  }
}
