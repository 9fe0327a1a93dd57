#include "collapse_box/scenarios.hpp"

#include <algorithm>
#include <cmath>

#include "collapse_box/quadrature.hpp"

namespace cbox {
namespace {

constexpr double kWindowNormalization = 1e-6;

template <class Fn>
IntegrationResult guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const QuadratureError& e) {
    throw Error(ErrorCode::QuadratureFailure, e.what());
  }
}

std::vector<double> positive_differences(const std::vector<double>& points) {
  std::vector<double> out;
  for (double a : points)
    for (double b : points)
      if (b > a) out.push_back(b - a);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void check_choice(int x) {
  if (x != 0 && x != 1) throw Error(ErrorCode::InvalidConfig, "Alice's choice must be 0 or 1");
}

// int_0^upper fn(u) h_D(u) du
double integrate_against_difference(const WindowSpec& window, const std::function<double(double)>& fn, double upper,
                                    std::vector<double> extra_breaks, double tol) {
  upper = std::min(upper, window.length());
  if (upper <= 0.0) return 0.0;
  std::vector<double> breaks = positive_differences(window.breakpoints());
  breaks.insert(breaks.end(), extra_breaks.begin(), extra_breaks.end());
  QuadratureOptions opts;
  opts.tol = tol;
  opts.breakpoints = breaks;
  const double inner_tol = 0.01 * tol / window.length();
  return guarded([&] {
           return integrate([&](double u) { return fn(u) * difference_density(window, u, inner_tol); }, 0.0, upper,
                            opts);
         })
      .value;
}

}  // namespace

void validate_schedule(const Schedule& s) {
  if (!std::isfinite(s.t_alice) || !std::isfinite(s.t_bob))
    throw Error(ErrorCode::InvalidConfig, "schedule times must be finite");
  if (s.t_bob < s.t_alice) throw Error(ErrorCode::InvalidConfig, "fixed schedule needs t_B >= t_A");
  check_choice(s.x);
}

BoxBehavior TwoBoxScenario::initial_behavior() const {
  const std::size_t n = prior().size();
  Alphabets dims{n, n, 2, 2};
  Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dims.table_size()));
  auto at = [&](std::size_t a, std::size_t b, std::size_t x, std::size_t y) -> double& {
    return t(static_cast<Eigen::Index>(((x * 2 + y) * n + a) * n + b));
  };
  at(0, 0, 0, 0) = 1.0;
  for (std::size_t k = 0; k < n; ++k) {
    at(0, k, 0, 1) = prior()[k];
    at(k, 0, 1, 0) = prior()[k];
    at(k, k, 1, 1) = prior()[k];
  }
  return BoxBehavior(dims, std::move(t), 1e-9);
}

Distribution bob_marginal(const TwoBoxScenario& scenario, int x, double elapsed) {
  check_choice(x);
  if (!(elapsed >= 0.0)) throw Error(ErrorCode::NegativeElapsed, "Bob's probe precedes Alice's input");
  if (x == 0) return scenario.prior();
  return marginal_at(scenario.family(), scenario.prior(), elapsed);
}

double theta(const WindowSpec& window, double dt_min, double tol) {
  if (!(dt_min >= 0.0)) throw Error(ErrorCode::InvalidSpec, "dt_min must be >= 0");
  if (dt_min == 0.0) return 0.0;
  const double len = window.length();
  const auto breaks = window.breakpoints();
  QuadratureOptions opts;
  opts.tol = tol;
  opts.breakpoints = breaks;
  const auto r = guarded([&] {
    return integrate2([&](double u, double v) { return window.pdf(u) * window.pdf(v); },
                      Band{0.0, len, 0.0, len, dt_min}, opts);
  });
  return std::clamp(r.value, 0.0, 1.0);
}

double difference_density(const WindowSpec& window, double u, double tol) {
  const double len = window.length();
  if (u < 0.0 || u >= len) return 0.0;
  std::vector<double> breaks = window.breakpoints();
  for (double b : window.breakpoints()) breaks.push_back(b - u);
  QuadratureOptions opts;
  opts.tol = tol;
  opts.breakpoints = breaks;
  return guarded([&] {
           return integrate([&](double t) { return window.pdf(t) * window.pdf(t + u); }, 0.0, len - u, opts);
         })
      .value;
}

double omega(const WindowSpec& window, double dt_min, double tol) {
  if (!(dt_min >= 0.0)) throw Error(ErrorCode::InvalidSpec, "dt_min must be >= 0");
  return integrate_against_difference(window, [](double) { return 1.0; }, dt_min, {}, tol);
}

Distribution window_marginal(const TwoBoxScenario& scenario, const WindowSpec& window, int x, double tol) {
  check_choice(x);
  const Distribution& p0 = scenario.prior();
  if (x == 0) return p0;

  const CollapseFamily& f = scenario.family();
  const double dt_min = f.min_duration();
  const double th = theta(window, dt_min, tol);
  const double om = omega(window, dt_min, tol);
  if (om <= 0.0) {
    if (th > tol) throw Error(ErrorCode::FormulaInconsistency, "Theta > 0 with vanishing Omega");
    return p0;
  }

  const auto n = static_cast<Eigen::Index>(p0.size());
  Eigen::VectorXd out = (1.0 - th) * p0.weights();
  for (Eigen::Index bp = 0; bp < n; ++bp) {
    const double term = integrate_against_difference(
        window,
        [&](double u) {
          double s = 0.0;
          for (std::size_t b = 0; b < p0.size(); ++b) s += p0[b] * f(b, static_cast<std::size_t>(bp), u);
          return s;
        },
        dt_min, f.breakpoints(), tol);
    out(bp) += th / om * term;
  }
  if (std::abs(out.sum() - 1.0) > kWindowNormalization)
    throw Error(ErrorCode::FormulaInconsistency, "window formula sums to " + std::to_string(out.sum()));
  out = out.cwiseMax(0.0);
  return make_distribution(out, kWindowNormalization);
}

Distribution operational_window_marginal(const TwoBoxScenario& scenario, const WindowSpec& window, int x,
                                         double tol) {
  check_choice(x);
  const Distribution& p0 = scenario.prior();
  if (x == 0) return p0;

  const CollapseFamily& f = scenario.family();
  const double alice_first = omega(window, window.length(), tol);
  const auto n = static_cast<Eigen::Index>(p0.size());
  Eigen::VectorXd out = (1.0 - alice_first) * p0.weights();
  for (Eigen::Index bp = 0; bp < n; ++bp) {
    out(bp) += integrate_against_difference(
        window,
        [&](double u) {
          double s = 0.0;
          for (std::size_t b = 0; b < p0.size(); ++b) s += p0[b] * f(b, static_cast<std::size_t>(bp), u);
          return s;
        },
        window.length(), f.breakpoints(), tol);
  }
  out = out.cwiseMax(0.0);
  return make_distribution(out, kWindowNormalization);
}

}  // namespace cbox
