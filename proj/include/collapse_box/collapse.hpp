#pragma once

// Collapse families f_{aa'}(s): the probability that a box whose latent
// outcome is `a` answers `a'` when probed s seconds after the collapse was
// triggered.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "collapse_box/behaviors.hpp"

namespace cbox {

enum class FamilyKind {
  instantaneous,  // f = delta for every s > 0
  linear,         // straight-line interpolation from the prior to delta over dt_a
  exponential,    // weight 1 - exp(-rate_a s), clipped to delta at the cutoff
  step,           // frozen at the prior until dt_a, then delta
  table,          // tabulated rows, linear interpolation in s
};

std::string_view to_string(FamilyKind kind) noexcept;
FamilyKind family_kind_from_string(std::string_view name);

/// Tabulated profile: times[k] is an elapsed time, values[a] is a
/// (times.size() x |A|) matrix whose row k holds f_{a.}(times[k]).
struct FamilyTable {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> values;
};

struct FamilySpec {
  FamilyKind kind = FamilyKind::instantaneous;
  Distribution p0;
  std::vector<double> dt;     // linear, step, table
  std::vector<double> rates;  // exponential
  FamilyTable grid;           // table
};

/// The exponential profile is clipped to the delta row once its remaining
/// weight exp(-rate s) drops to this value.
inline constexpr double kExponentialCutoffTail = 1e-9;

class CollapseFamily {
 public:
  std::size_t alphabet_size() const noexcept { return spec_.p0.size(); }
  FamilyKind kind() const noexcept { return spec_.kind; }
  const FamilySpec& spec() const noexcept { return spec_; }
  const Distribution& prior() const noexcept { return spec_.p0; }

  /// Per-outcome collapse durations dt_a.
  const std::vector<double>& durations() const noexcept { return durations_; }
  double min_duration() const noexcept { return min_duration_; }
  double max_duration() const noexcept { return max_duration_; }

  /// f_{aa'}(s) for s >= 0.
  double operator()(std::size_t latent, std::size_t output, double elapsed) const;
  /// The full row f_{a.}(s).
  Eigen::VectorXd row(std::size_t latent, double elapsed) const;

  /// Kinks of the profile in s, for quadrature splitting.
  std::vector<double> breakpoints() const;

 private:
  friend CollapseFamily make_family(const FamilySpec&);
  friend CollapseFamily make_family_unchecked(const FamilySpec&);
  explicit CollapseFamily(FamilySpec spec);

  double mixing_weight(std::size_t latent, double elapsed) const;

  FamilySpec spec_;
  std::vector<double> durations_;
  double min_duration_ = 0.0;
  double max_duration_ = 0.0;
};

/// Builds a family and validates it against the boundary conditions; throws
/// BoundaryViolation if any clause fails.
CollapseFamily make_family(const FamilySpec& spec);

/// Builds a family with only structural checks (shapes, signs). Used to
/// inspect violating tables with validate_family.
CollapseFamily make_family_unchecked(const FamilySpec& spec);

CollapseFamily instantaneous_family(const Distribution& p0);
CollapseFamily linear_family(const Distribution& p0, std::vector<double> dt);
CollapseFamily exponential_family(const Distribution& p0, std::vector<double> rates);
CollapseFamily step_family(const Distribution& p0, std::vector<double> dt);

enum class BoundaryClause { initial, final, normalization, range };
std::string_view to_string(BoundaryClause clause) noexcept;

struct ClauseViolation {
  BoundaryClause clause;
  double worst = 0.0;
  double elapsed = 0.0;  // where the worst value occurred
  std::size_t latent = 0;
  std::size_t output = 0;
};

struct FamilyValidation {
  static constexpr double kTolerance = 1e-9;

  bool pass = true;
  /// One entry per clause, in BoundaryClause order.
  std::vector<ClauseViolation> clauses;

  const ClauseViolation& operator[](BoundaryClause c) const { return clauses[static_cast<std::size_t>(c)]; }
};

/// Checks the three boundary clauses and 0 <= f <= 1 at every grid point.
/// s = 0 and every dt_a are always added to the grid.
FamilyValidation validate_family(const CollapseFamily& family, std::span<const double> grid);

/// Evenly spaced grid over [0, dt*] with `points` entries.
std::vector<double> default_validation_grid(const CollapseFamily& family, std::size_t points = 1001);

/// P(a'; s) = sum_a f_{aa'}(s) P0(a).
Distribution marginal_at(const CollapseFamily& family, const Distribution& p0, double elapsed);

/// TV distance between marginal_at(s) and P0. Identically zero past dt*.
double single_box_witness(const CollapseFamily& family, const Distribution& p0, double elapsed);

}  // namespace cbox
