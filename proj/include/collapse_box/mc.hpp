#pragma once

// Seeded Monte Carlo for the collapse model. Every replica owns a
// counter-based random stream keyed by (seed, stream, replica index), so
// counts do not depend on how replicas are spread over workers.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "collapse_box/behaviors.hpp"
#include "collapse_box/collapse.hpp"
#include "collapse_box/scenarios.hpp"

namespace cbox {

struct SimConfig {
  std::uint64_t replicas = 100000;
  std::uint64_t seed = 0;
  /// Separates independent draws made with the same seed.
  std::uint64_t stream = 0;
  unsigned workers = 0;
};

void validate_config(const SimConfig& cfg);

/// Counter-based uniform source: draw k of replica r is a pure function of
/// (seed, stream, r, k).
class ReplicaStream {
 public:
  ReplicaStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t replica) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double next_uniform() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t mix64(std::uint64_t z) noexcept;

/// Index i with cumulative[i-1] <= u < cumulative[i].
std::size_t sample_categorical(const std::vector<double>& cumulative, double u) noexcept;
std::vector<double> cumulative_of(const Eigen::VectorXd& weights);

class EmpiricalDist {
 public:
  explicit EmpiricalDist(std::vector<std::uint64_t> counts);

  std::size_t size() const noexcept { return counts_.size(); }
  std::uint64_t total() const noexcept { return total_; }
  const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
  double frequency(std::size_t i) const;
  Eigen::VectorXd frequencies() const;

  /// Wilson score interval for cell i; z = 1.96 gives 95%.
  std::pair<double, double> wilson(std::size_t i, double z = 1.959963984540054) const;

 private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

/// sqrt(p (1 - p) / n)
double binomial_standard_error(double p, std::uint64_t n);

/// Largest |freq_i - p_i| / se_i over cells, using the standard error of p_i.
/// Cells with p_i in {0, 1} contribute infinity on any mismatch, 0 otherwise.
double max_standard_score(const EmpiricalDist& e, const Distribution& p);

EmpiricalDist simulate_single(const CollapseFamily& family, const Distribution& p0, double elapsed,
                              const SimConfig& cfg);

EmpiricalDist simulate_twobox(const TwoBoxScenario& scenario, const Schedule& schedule, const SimConfig& cfg);

/// Each replica draws t_A, t_B ~ g independently; the earlier input triggers
/// with latent b ~ P0, and Bob reads f_{b.}(t_B - t_A) if Alice acted first
/// (and chose x = 1), the latent otherwise.
EmpiricalDist simulate_window(const TwoBoxScenario& scenario, const WindowSpec& window, const SimConfig& cfg,
                              int x = 1);

enum class GofMethod { pearson, exact_multinomial, pearson_large_fallback };
std::string_view to_string(GofMethod m) noexcept;

struct GofReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;
  bool reject = false;
  GofMethod method = GofMethod::pearson;
};

/// Pearson chi-square against p; switches to the exact multinomial test when
/// an expected cell count is below 5.
GofReport gof_test(const EmpiricalDist& e, const Distribution& p, double alpha);

/// Chi-square test of homogeneity for two samples over the same alphabet.
GofReport homogeneity_test(const EmpiricalDist& first, const EmpiricalDist& second, double alpha);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

}  // namespace cbox
