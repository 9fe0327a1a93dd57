#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "collapse_box/quadrature.hpp"

using namespace cbox;

TEST(Integrate, Constant) { EXPECT_NEAR(integrate([](double) { return 1.0; }, 0, 1).value, 1.0, 1e-15); }

TEST(Integrate, CubicsAreExact) {
  EXPECT_NEAR(integrate([](double t) { return 3 * t * t; }, 0, 1).value, 1.0, 1e-14);
  const auto r = integrate([](double t) { return 4 * t * t * t - 2 * t + 1; }, -1, 2);
  // antiderivative t^4 - t^2 + t
  EXPECT_NEAR(r.value, (16 - 4 + 2) - (1 - 1 - 1), 1e-13);
  EXPECT_GE(r.error, 0.0);
}

TEST(Integrate, UniformDifferenceDensity) {
  // D = t_B - t_A for uniform inputs on [0,1] has density 1 - u on [0,1].
  EXPECT_NEAR(integrate([](double u) { return 1.0 - u; }, 0, 0.5).value, 0.375, 1e-14);
}

TEST(Integrate, EmptyIntervalAndBadBounds) {
  EXPECT_EQ(integrate([](double) { return 5.0; }, 2, 2).value, 0.0);
  EXPECT_THROW(integrate([](double) { return 1.0; }, 1, 0), Error);
}

TEST(Integrate, JumpAtBreakpointUsesOneSidedLimits) {
  auto step = [](double t) { return t >= 0.3 ? 2.0 : 1.0; };
  const std::array<double, 1> bp{0.3};
  QuadratureOptions opts;
  opts.breakpoints = bp;
  const auto r = integrate(step, 0, 1, opts);
  EXPECT_NEAR(r.value, 0.3 + 1.4, 1e-12);
  EXPECT_LT(r.evaluations, 50u);
}

TEST(Integrate, JumpAtEndpointBreakpoint) {
  // Isolated values at both ends, as with a family that holds the prior only at s = 0.
  auto spike = [](double t) { return t == 0.0 || t == 1.0 ? 5.0 : 1.0; };
  const std::array<double, 2> bp{0.0, 1.0};
  QuadratureOptions opts;
  opts.breakpoints = bp;
  const auto r = integrate(spike, 0, 1, opts);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_LT(r.evaluations, 20u);
}

TEST(Integrate, MaxDepthExceededCarriesBestValue) {
  QuadratureOptions opts;
  opts.tol = 1e-14;
  opts.max_depth = 3;
  try {
    integrate([](double t) { return std::exp(10 * t); }, 0, 1, opts);
    FAIL();
  } catch (const QuadratureError& e) {
    EXPECT_EQ(e.code(), ErrorCode::MaxDepthExceeded);
    EXPECT_NEAR(e.best().value, (std::exp(10.0) - 1) / 10, 1.0);
  }
}

namespace {

struct Known {
  std::function<double(double)> f;
  std::function<double(double)> antiderivative;
  std::vector<double> breaks;
};

// Polynomials, exponentials and clamped ramps with random parameters.
Known random_integrand(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0), pos(0.1, 1.0);
  switch (rng() % 3) {
    case 0: {
      const double c0 = u(rng), c1 = u(rng), c2 = u(rng), c3 = u(rng), c4 = u(rng), c5 = u(rng);
      return {[=](double t) { return c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5)))); },
              [=](double t) {
                return t * (c0 + t * (c1 / 2 + t * (c2 / 3 + t * (c3 / 4 + t * (c4 / 5 + t * c5 / 6)))));
              },
              {}};
    }
    case 1: {
      const double k = u(rng) * 2, amp = u(rng);
      return {[=](double t) { return amp * std::exp(k * t); }, [=](double t) { return amp * std::exp(k * t) / k; }, {}};
    }
    default: {
      // clamp(t / d, 0, 1) starting at s0, like a linear collapse weight
      const double s0 = pos(rng) * 0.5, d = pos(rng);
      auto F = [=](double t) {
        if (t <= s0) return 0.0;
        if (t >= s0 + d) return d / 2 + (t - s0 - d);
        return (t - s0) * (t - s0) / (2 * d);
      };
      return {[=](double t) { return std::clamp((t - s0) / d, 0.0, 1.0); }, F, {s0, s0 + d}};
    }
  }
}

}  // namespace

TEST(IntegrateProperty, ErrorEstimateBoundsTrueError) {
  std::mt19937_64 rng(99);
  int bounded = 0, total = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const Known k = random_integrand(rng);
    const double a = -0.5, b = 1.5;
    for (double tol : {1e-6, 1e-9}) {
      QuadratureOptions o;
      o.tol = tol;
      o.breakpoints = k.breaks;
      const auto r = integrate(k.f, a, b, o);
      const double truth = k.antiderivative(b) - k.antiderivative(a);
      const double err = std::abs(r.value - truth);
      ++total;
      if (err <= r.error + 1e-14 * std::max(1.0, std::abs(truth))) ++bounded;
      EXPECT_LE(err, 10 * tol + 1e-13);
    }
  }
  EXPECT_GE(bounded, static_cast<int>(0.99 * total));
}

TEST(IntegrateProperty, HalvingTolDoesNotIncreaseError) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Known k = random_integrand(rng);
    const double truth = k.antiderivative(1.0) - k.antiderivative(0.0);
    double previous = std::numeric_limits<double>::infinity();
    for (double tol = 1e-4; tol >= 1e-10; tol /= 2) {
      QuadratureOptions o;
      o.tol = tol;
      o.breakpoints = k.breaks;
      const double err = std::abs(integrate(k.f, 0.0, 1.0, o).value - truth);
      EXPECT_LE(err, previous + 1e-14 * std::max(1.0, std::abs(truth))) << "trial " << trial << " tol " << tol;
      previous = std::max(err, 0.0);
    }
  }
}

TEST(Integrate2, Examples) {
  EXPECT_NEAR(integrate2([](double, double) { return 1.0; }, Rectangle{0, 1, 0, 1}).value, 1.0, 1e-14);
  // Uniform inputs on [0,1], |u - v| < 0.5: 2r - r^2 with r = 0.5.
  EXPECT_NEAR(integrate2([](double, double) { return 1.0; }, Band{0, 1, 0, 1, 0.5}).value, 0.75, 1e-12);
  EXPECT_EQ(integrate2([](double, double) { return 1.0; }, Band{0, 1, 0, 1, 0.0}).value, 0.0);
}

TEST(Integrate2, SmoothIntegrandOverRectangle) {
  const auto r = integrate2([](double u, double v) { return std::exp(u) * v * v; }, Rectangle{0, 1, 0, 2});
  EXPECT_NEAR(r.value, (std::exp(1.0) - 1) * 8.0 / 3.0, 1e-9);
  EXPECT_GE(r.error, 0.0);
}
