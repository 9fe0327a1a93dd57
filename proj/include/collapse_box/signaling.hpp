#pragma once

// Signaling measures: how far Bob's statistics move with Alice's choice, and
// the capacity of the classical channel that movement induces.

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "collapse_box/mc.hpp"
#include "collapse_box/scenarios.hpp"

namespace cbox {

enum class Verdict { non_signaling, signaling };
std::string_view to_string(Verdict v) noexcept;

struct WitnessOptions {
  SimConfig sim;
  double alpha = 0.01;
  /// Analytic TV at or below this counts as zero.
  double tol = 1e-9;
};

struct WitnessReport {
  double elapsed = 0.0;
  Distribution analytic_reference;  // Bob's marginal for x = 0 (or the prior)
  Distribution analytic_probe;      // for x = 1 (or the evolved marginal)
  double tv_analytic = 0.0;
  double tv_empirical = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double p_value = 1.0;
  bool empirical_reject = false;
  Verdict verdict = Verdict::non_signaling;
};

/// Combines analytic marginals with two empirical samples. Signaling is
/// declared only when the analytic TV exceeds tol and the homogeneity test
/// rejects at alpha.
WitnessReport assess(const Distribution& reference, const Distribution& probe, const EmpiricalDist& empirical_reference,
                     const EmpiricalDist& empirical_probe, const WitnessOptions& opts);

/// Empirical TV with a delta-method 95% interval clamped to [0, 1].
struct TvEstimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
TvEstimate empirical_tv(const EmpiricalDist& first, const EmpiricalDist& second);

/// Fixed-schedule witness: Alice's input at 0, Bob's probe at `elapsed`.
/// Branch x = 0 uses stream sim.stream, branch x = 1 uses sim.stream + 1.
WitnessReport witness(const TwoBoxScenario& scenario, double elapsed, const WitnessOptions& opts);

/// Same comparison with both input times drawn over a window.
WitnessReport window_witness(const TwoBoxScenario& scenario, const WindowSpec& window, const WitnessOptions& opts);

/// Single box: the marginal probed at `elapsed` against the prior. The
/// empirical reference is a probe at the trigger instant.
WitnessReport single_box_report(const CollapseFamily& family, double elapsed, const WitnessOptions& opts);

/// One report per grid point. Point i uses seed mix64(seed + i); points run in
/// parallel but results come back in grid order.
std::vector<WitnessReport> witness_sweep(const TwoBoxScenario& scenario, const std::vector<double>& grid,
                                         const WitnessOptions& opts);

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) noexcept;

/// Channel from Alice's binary choice to Bob's output; row x is Bob's
/// distribution under choice x.
class InducedChannel {
 public:
  InducedChannel(const Distribution& given_x0, const Distribution& given_x1);

  const Eigen::Matrix<double, 2, Eigen::Dynamic>& matrix() const noexcept { return rows_; }
  std::size_t outputs() const noexcept { return static_cast<std::size_t>(rows_.cols()); }

 private:
  Eigen::Matrix<double, 2, Eigen::Dynamic> rows_;
};

/// I(X;Y) in bits for an input prior over the channel rows.
double mutual_information(const Eigen::Vector2d& prior, const InducedChannel& channel);

struct CapacityResult {
  double bits = 0.0;
  Eigen::Vector2d optimal_prior;
  std::size_t iterations = 0;
};

/// Blahut-Arimoto; stops when the upper and lower capacity bounds are within
/// tol bits. Throws NonConvergence after max_iterations.
CapacityResult blahut_arimoto(const InducedChannel& channel, double tol = 1e-12, std::size_t max_iterations = 1000000);

double channel_capacity(const InducedChannel& channel, double tol = 1e-12);

}  // namespace cbox
