#pragma once

// Finite distributions and bipartite box behaviors P(a,b|x,y), with
// non-signaling and local-polytope classification.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "collapse_box/error.hpp"

namespace cbox {

/// Probability vector over a finite outcome alphabet. Weights are stored as
/// given; construction never renormalizes.
class Distribution {
 public:
  static constexpr double kSumTolerance = 1e-9;

  Distribution() = default;

  std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }
  double operator[](std::size_t i) const { return weights_(static_cast<Eigen::Index>(i)); }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  std::vector<double> to_vector() const;

  /// Deterministic distribution concentrated on `outcome`.
  static Distribution delta(std::size_t size, std::size_t outcome);

 private:
  friend Distribution make_distribution(const Eigen::VectorXd& weights, double tol);
  explicit Distribution(Eigen::VectorXd w) : weights_(std::move(w)) {}

  Eigen::VectorXd weights_;
};

Distribution make_distribution(const Eigen::VectorXd& weights,
                               double tol = Distribution::kSumTolerance);
Distribution make_distribution(std::span<const double> weights,
                               double tol = Distribution::kSumTolerance);
Distribution make_distribution(std::initializer_list<double> weights);

/// Total variation distance, (1/2) * sum |p_i - q_i|.
double tv_distance(const Distribution& p, const Distribution& q);

/// Max |p_i - q_i|.
double max_abs_difference(const Distribution& p, const Distribution& q);

struct Alphabets {
  std::size_t a = 2;  // Alice outputs
  std::size_t b = 2;  // Bob outputs
  std::size_t x = 2;  // Alice inputs
  std::size_t y = 2;  // Bob inputs

  std::size_t table_size() const noexcept { return a * b * x * y; }
  bool operator==(const Alphabets&) const = default;
};

/// Conditional table P(a,b|x,y), stored flat in [x][y][a][b] order.
class BoxBehavior {
 public:
  static constexpr double kSumTolerance = 1e-12;

  /// Validates non-negativity and per-(x,y) normalization.
  BoxBehavior(Alphabets dims, Eigen::VectorXd table, double tol = kSumTolerance);

  const Alphabets& dims() const noexcept { return dims_; }
  const Eigen::VectorXd& table() const noexcept { return table_; }

  std::size_t index(std::size_t a, std::size_t b, std::size_t x, std::size_t y) const noexcept {
    return ((x * dims_.y + y) * dims_.a + a) * dims_.b + b;
  }
  double operator()(std::size_t a, std::size_t b, std::size_t x, std::size_t y) const {
    return table_(static_cast<Eigen::Index>(index(a, b, x, y)));
  }

  double alice_marginal(std::size_t a, std::size_t x, std::size_t y) const;
  double bob_marginal(std::size_t b, std::size_t x, std::size_t y) const;

 private:
  Alphabets dims_;
  Eigen::VectorXd table_;
};

/// P(a,b|x,y) = 1/2 iff a xor b = x*y.
BoxBehavior pr_box();
/// P(a,b|x,y) = 1/4 for every entry of the CHSH scenario.
BoxBehavior uniform_box();
/// Deterministic local box a = alice[x], b = bob[y].
BoxBehavior deterministic_box(const Alphabets& dims, std::span<const std::size_t> alice,
                              std::span<const std::size_t> bob);

struct NonSignalingReport {
  bool pass = true;
  double max_violation = 0.0;
  /// Human-readable location of the largest discrepancy, empty when zero.
  std::string violating_marginal;
};

NonSignalingReport is_nonsignaling(const BoxBehavior& box, double tol = 1e-9);

/// A linear functional over table entries, sum_i coefficients_i * P_i <= bound,
/// satisfied by every local box.
struct BellInequality {
  Eigen::VectorXd coefficients;
  double bound = 0.0;
  double value = 0.0;  // evaluated on the rejected box
};

struct LocalityReport {
  bool member = false;
  /// Deterministic strategies, one column each, in enumeration order.
  Eigen::MatrixXd vertices;
  /// Convex weights over `vertices` when member.
  Eigen::VectorXd weights;
  /// Separating inequality when not a member.
  BellInequality facet;
  double residual = 0.0;
};

/// Every deterministic local strategy of the scenario as a column vector of
/// table entries. Alice strategy index varies slowest.
Eigen::MatrixXd deterministic_vertices(const Alphabets& dims);

LocalityReport is_local(const BoxBehavior& box, double tol = 1e-9);

/// S = E(0,0) + E(0,1) + E(1,0) - E(1,1).
double chsh_value(const BoxBehavior& box);

}  // namespace cbox
