#include <array>
#include <random>

#include <gtest/gtest.h>

#include "collapse_box/behaviors.hpp"

using namespace cbox;

namespace {

// Brute-force CHSH over the 16 deterministic strategies, independent of
// deterministic_vertices().
double best_local_chsh() {
  double best = -10.0;
  for (int s = 0; s < 16; ++s) {
    const int a0 = s & 1, a1 = (s >> 1) & 1, b0 = (s >> 2) & 1, b1 = (s >> 3) & 1;
    auto e = [](int a, int b) { return a == b ? 1.0 : -1.0; };
    best = std::max(best, e(a0, b0) + e(a0, b1) + e(a1, b0) - e(a1, b1));
  }
  return best;
}

BoxBehavior random_local_mixture(std::mt19937_64& rng, const Alphabets& dims) {
  const Eigen::MatrixXd v = deterministic_vertices(dims);
  std::exponential_distribution<double> ex(1.0);
  Eigen::VectorXd w(v.cols());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = ex(rng);
  w /= w.sum();
  return BoxBehavior(dims, v * w, 1e-9);
}

Distribution random_distribution(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> ex(1.0);
  Eigen::VectorXd w(static_cast<Eigen::Index>(n));
  for (auto& x : w) x = ex(rng);
  w /= w.sum();
  return make_distribution(w);
}

}  // namespace

TEST(Distribution, AcceptsNormalizedWeights) {
  const auto fair = make_distribution({0.5, 0.5});
  EXPECT_EQ(fair.size(), 2u);
  EXPECT_DOUBLE_EQ(fair[0], 0.5);
  const auto det = make_distribution({1.0, 0.0});
  EXPECT_DOUBLE_EQ(det[0], 1.0);
  EXPECT_DOUBLE_EQ(det[1], 0.0);
}

TEST(Distribution, RejectsMalformedWeights) {
  try {
    make_distribution({0.3, 0.7, 0.1});
    FAIL() << "expected NotNormalized";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotNormalized);
  }
  try {
    make_distribution({1.2, -0.2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeWeight);
  }
  try {
    make_distribution(std::span<const double>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyAlphabet);
  }
}

TEST(Distribution, NoSilentRenormalization) {
  const auto d = make_distribution({0.5, 0.5 + 5e-10});
  EXPECT_DOUBLE_EQ(d[1], 0.5 + 5e-10);
}

TEST(TvDistance, Examples) {
  EXPECT_DOUBLE_EQ(tv_distance(make_distribution({0.5, 0.5}), make_distribution({0.5, 0.5})), 0.0);
  EXPECT_DOUBLE_EQ(tv_distance(make_distribution({1.0, 0.0}), make_distribution({0.0, 1.0})), 1.0);
  EXPECT_NEAR(tv_distance(make_distribution({0.3, 0.7}), make_distribution({0.51, 0.49})), 0.21, 1e-15);
}

TEST(TvDistance, AlphabetMismatch) {
  EXPECT_THROW(tv_distance(make_distribution({1.0}), make_distribution({0.5, 0.5})), Error);
}

TEST(TvDistance, IsAMetricOnRandomTriples) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + trial % 5;
    const auto p = random_distribution(rng, n), q = random_distribution(rng, n), r = random_distribution(rng, n);
    EXPECT_DOUBLE_EQ(tv_distance(p, q), tv_distance(q, p));
    EXPECT_LE(tv_distance(p, p), 1e-12);
    EXPECT_GT(tv_distance(p, q), 0.0);
    EXPECT_LE(tv_distance(p, r), tv_distance(p, q) + tv_distance(q, r) + 1e-15);
    EXPECT_LE(tv_distance(p, q), 1.0);
  }
}

TEST(BoxBehavior, ValidatesTable) {
  EXPECT_THROW(BoxBehavior(Alphabets{}, Eigen::VectorXd::Constant(16, 0.3)), Error);
  EXPECT_THROW(BoxBehavior(Alphabets{}, Eigen::VectorXd::Constant(15, 0.25)), Error);
  Eigen::VectorXd neg = Eigen::VectorXd::Constant(16, 0.25);
  neg(0) = -0.25;
  neg(1) = 0.75;
  EXPECT_THROW(BoxBehavior(Alphabets{}, neg), Error);
}

TEST(NonSignaling, PrBoxPasses) {
  const auto r = is_nonsignaling(pr_box());
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.max_violation, 0.0);
  EXPECT_TRUE(r.violating_marginal.empty());
}

TEST(NonSignaling, ProductBoxPasses) {
  const std::array<double, 2> p{0.2, 0.8}, q{0.6, 0.4};
  Eigen::VectorXd t(16);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) t(static_cast<Eigen::Index>(((x * 2 + y) * 2 + a) * 2 + b)) = p[a] * q[b];
  EXPECT_TRUE(is_nonsignaling(BoxBehavior(Alphabets{}, t)).pass);
}

TEST(NonSignaling, DetectsBobMarginalDependingOnX) {
  // x = 0: a = b = 0.  x = 1: a = 0, b uniform.
  Eigen::VectorXd t = Eigen::VectorXd::Zero(16);
  auto at = [&](int a, int b, int x, int y) -> double& { return t(((x * 2 + y) * 2 + a) * 2 + b); };
  for (int y = 0; y < 2; ++y) {
    at(0, 0, 0, y) = 1.0;
    at(0, 0, 1, y) = 0.5;
    at(0, 1, 1, y) = 0.5;
  }
  const auto r = is_nonsignaling(BoxBehavior(Alphabets{}, t));
  EXPECT_FALSE(r.pass);
  EXPECT_DOUBLE_EQ(r.max_violation, 0.5);
  EXPECT_NE(r.violating_marginal.find("P_B"), std::string::npos);
}

TEST(Chsh, Examples) {
  const std::array<std::size_t, 2> zero{0, 0};
  EXPECT_DOUBLE_EQ(chsh_value(deterministic_box(Alphabets{}, zero, zero)), 2.0);
  EXPECT_DOUBLE_EQ(chsh_value(pr_box()), 4.0);
  EXPECT_DOUBLE_EQ(chsh_value(uniform_box()), 0.0);
}

TEST(Chsh, WrongShape) {
  const Alphabets d{3, 2, 2, 2};
  const std::array<std::size_t, 2> s{0, 0};
  try {
    chsh_value(deterministic_box(d, s, s));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongScenarioShape);
  }
}

TEST(Locality, VertexCountAndLocalBound) {
  const Eigen::MatrixXd v = deterministic_vertices(Alphabets{});
  EXPECT_EQ(v.rows(), 16);
  EXPECT_EQ(v.cols(), 16);
  double best = -10;
  for (Eigen::Index c = 0; c < v.cols(); ++c) best = std::max(best, chsh_value(BoxBehavior(Alphabets{}, v.col(c))));
  EXPECT_DOUBLE_EQ(best, best_local_chsh());
  EXPECT_DOUBLE_EQ(best, 2.0);
}

TEST(Locality, DeterministicBoxIsAVertex) {
  const std::array<std::size_t, 2> a{1, 0}, b{0, 1};
  const auto r = is_local(deterministic_box(Alphabets{}, a, b));
  ASSERT_TRUE(r.member);
  EXPECT_NEAR(r.weights.maxCoeff(), 1.0, 1e-12);
  EXPECT_NEAR(r.weights.sum(), 1.0, 1e-12);
}

TEST(Locality, PrBoxRejectedWithSeparatingInequality) {
  const auto box = pr_box();
  const auto r = is_local(box);
  ASSERT_FALSE(r.member);
  EXPECT_GT(r.facet.value, r.facet.bound + 1e-6);
  for (Eigen::Index c = 0; c < r.vertices.cols(); ++c)
    EXPECT_LE(r.facet.coefficients.dot(r.vertices.col(c)), r.facet.bound + 1e-9);
}

TEST(Locality, UniformNoiseIsMember) {
  const auto box = uniform_box();
  const auto r = is_local(box);
  ASSERT_TRUE(r.member);
  EXPECT_LE((r.vertices * r.weights - box.table()).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_GE(r.weights.minCoeff(), 0.0);
}

TEST(Locality, ScenarioTooLarge) {
  const Alphabets huge{4, 4, 8, 8};
  try {
    deterministic_vertices(huge);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ScenarioTooLarge);
  }
}

TEST(Locality, MixtureBetweenPrAndNoise) {
  // v PR + (1 - v) noise has CHSH 4v, local iff v <= 1/2.
  for (double v : {0.3, 0.5, 0.55, 0.8}) {
    const BoxBehavior box(Alphabets{}, v * pr_box().table() + (1 - v) * uniform_box().table());
    EXPECT_NEAR(chsh_value(box), 4 * v, 1e-12);
    EXPECT_EQ(is_local(box).member, v <= 0.5) << v;
  }
}

TEST(LocalityProperty, RandomLocalMixtures) {
  std::mt19937_64 rng(2024);
  for (const Alphabets dims : {Alphabets{}, Alphabets{3, 2, 2, 2}, Alphabets{2, 2, 3, 2}}) {
    for (int trial = 0; trial < 25; ++trial) {
      const BoxBehavior box = random_local_mixture(rng, dims);
      const auto r = is_local(box);
      ASSERT_TRUE(r.member);
      EXPECT_LE((r.vertices * r.weights - box.table()).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_TRUE(is_nonsignaling(box).pass);
      if (dims == Alphabets{}) {
        const double s = chsh_value(box);
        EXPECT_LE(std::abs(s), 2.0 + 1e-9);
      }
    }
  }
}
