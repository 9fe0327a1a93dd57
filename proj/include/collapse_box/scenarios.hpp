#pragma once

// Analytic evaluators for the timed two-box layouts: fixed schedules and the
// randomized input-time window.

#include <cstddef>
#include <vector>

#include "collapse_box/behaviors.hpp"
#include "collapse_box/collapse.hpp"

namespace cbox {

enum class DensityKind { uniform, truncated_exponential, table };

/// Input-time density g over [0, length] (time measured from the window
/// start). Table densities are piecewise linear between grid points and zero
/// outside the grid.
class TimeDensity {
 public:
  static TimeDensity uniform();
  static TimeDensity truncated_exponential(double rate);
  static TimeDensity table(std::vector<double> times, std::vector<double> values);

  DensityKind kind() const noexcept { return kind_; }
  double rate() const noexcept { return rate_; }
  const std::vector<double>& times() const noexcept { return times_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  DensityKind kind_ = DensityKind::uniform;
  double rate_ = 0.0;
  std::vector<double> times_;
  std::vector<double> values_;
};

/// Window of length dt over which each party's single input time is drawn
/// independently from g.
class WindowSpec {
 public:
  static constexpr double kNormalizationTolerance = 1e-9;

  WindowSpec(double length, TimeDensity density);

  double length() const noexcept { return length_; }
  const TimeDensity& density() const noexcept { return density_; }

  double pdf(double t) const;
  double cdf(double t) const;
  /// Inverse CDF; u in [0, 1).
  double quantile(double u) const;
  /// Interior kinks of g.
  std::vector<double> breakpoints() const;

 private:
  double length_;
  TimeDensity density_;
  std::vector<double> cumulative_;  // table: CDF at each grid time
};

/// Correlated pair with perfect correlation on the CT inputs (x = y = 1).
/// Input 0 on either side is non-collapse-triggering with deterministic
/// output 0.
class TwoBoxScenario {
 public:
  explicit TwoBoxScenario(CollapseFamily family) : family_(std::move(family)) {}

  const Distribution& prior() const noexcept { return family_.prior(); }
  const CollapseFamily& family() const noexcept { return family_; }

  /// Pre-collapse behavior P0(a,b|x,y): NCT inputs answer 0, CT inputs share
  /// a = b ~ P0.
  BoxBehavior initial_behavior() const;

 private:
  CollapseFamily family_;
};

struct Schedule {
  double t_alice = 0.0;
  double t_bob = 0.0;
  int x = 1;

  double elapsed() const noexcept { return t_bob - t_alice; }
};

/// Throws InvalidConfig unless times are finite, t_bob >= t_alice and x is 0 or 1.
void validate_schedule(const Schedule& schedule);

/// Bob's output distribution when he probes `elapsed` seconds after Alice's
/// input `x`.
Distribution bob_marginal(const TwoBoxScenario& scenario, int x, double elapsed);

/// Probability that two independent g-draws lie within dt_min of each other.
double theta(const WindowSpec& window, double dt_min, double tol = 1e-9);

/// Density of D = t_B - t_A at u >= 0.
double difference_density(const WindowSpec& window, double u, double tol = 1e-11);

/// P(0 <= D <= dt_min), the integral of the difference density.
double omega(const WindowSpec& window, double dt_min, double tol = 1e-9);

/// Closed-form evaluation of the window formula
///   P(b') = (1 - Theta) P0(b') + (Theta / Omega) sum_b P0(b) int_0^dt~ f_{bb'}(u) h_D(u) du
/// with Theta, Omega and the difference density h_D as above. Throws
/// FormulaInconsistency if the result is not normalized to 1e-6.
Distribution window_marginal(const TwoBoxScenario& scenario, const WindowSpec& window, int x = 1,
                             double tol = 1e-9);

/// Expected Bob marginal under the simulation semantics: whoever acts first
/// triggers, Bob's output follows f at the elapsed difference when Alice was
/// first and P0 otherwise.
Distribution operational_window_marginal(const TwoBoxScenario& scenario, const WindowSpec& window, int x = 1,
                                         double tol = 1e-9);

}  // namespace cbox
