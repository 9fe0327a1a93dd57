#include "collapse_box/mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "collapse_box/parallel.hpp"

namespace cbox {

unsigned resolve_workers(unsigned hint) {
  unsigned n = hint != 0 ? hint : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("COLLAPSE_BOX_THREADS")) {
    char* end = nullptr;
    const unsigned long cap = std::strtoul(env, &end, 10);
    if (end != env && cap > 0) n = std::min<unsigned long>(n, cap);
  }
  return std::max(1u, n);
}

void parallel_blocks(std::size_t count, unsigned workers,
                     const std::function<void(std::size_t, std::size_t, unsigned)>& fn) {
  if (count == 0) return;
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
  if (workers == 1) {
    fn(0, count, 0);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = count / workers, extra = count % workers;
  std::size_t begin = 0;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t end = begin + chunk + (w < extra ? 1 : 0);
    pool.emplace_back(fn, begin, end, w);
    begin = end;
  }
  for (auto& t : pool) t.join();
}

std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kStreamStep = 0xD1B54A32D192ED03ULL;
constexpr std::uint64_t kReplicaStep = 0xAEF17502108EF2D9ULL;
}  // namespace

ReplicaStream::ReplicaStream(std::uint64_t seed, std::uint64_t stream, std::uint64_t replica) noexcept
    : key_(mix64(mix64(mix64(seed) + (stream + 1) * kStreamStep) + (replica + 1) * kReplicaStep)) {}

std::uint64_t ReplicaStream::next_u64() noexcept { return mix64(key_ + (++counter_) * kGolden); }

double ReplicaStream::next_uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::vector<double> cumulative_of(const Eigen::VectorXd& weights) {
  std::vector<double> c(static_cast<std::size_t>(weights.size()));
  double s = 0.0;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    s += std::max(0.0, weights(i));
    c[static_cast<std::size_t>(i)] = s;
  }
  return c;
}

std::size_t sample_categorical(const std::vector<double>& cumulative, double u) noexcept {
  const double target = u * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
  if (it == cumulative.end()) {
    // u * total rounded onto the last edge: fall back to the last cell with mass.
    std::size_t i = cumulative.size() - 1;
    while (i > 0 && cumulative[i] == cumulative[i - 1]) --i;
    return i;
  }
  return static_cast<std::size_t>(it - cumulative.begin());
}

void validate_config(const SimConfig& cfg) {
  if (cfg.replicas < 1) throw Error(ErrorCode::InvalidConfig, "replica count must be >= 1");
}

EmpiricalDist::EmpiricalDist(std::vector<std::uint64_t> counts) : counts_(std::move(counts)) {
  if (counts_.empty()) throw Error(ErrorCode::EmptyAlphabet, "empirical distribution over no outcomes");
  for (auto c : counts_) total_ += c;
}

double EmpiricalDist::frequency(std::size_t i) const {
  return total_ == 0 ? 0.0 : static_cast<double>(counts_.at(i)) / static_cast<double>(total_);
}

Eigen::VectorXd EmpiricalDist::frequencies() const {
  Eigen::VectorXd f(static_cast<Eigen::Index>(counts_.size()));
  for (std::size_t i = 0; i < counts_.size(); ++i) f(static_cast<Eigen::Index>(i)) = frequency(i);
  return f;
}

std::pair<double, double> EmpiricalDist::wilson(std::size_t i, double z) const {
  if (total_ == 0) return {0.0, 1.0};
  const double n = static_cast<double>(total_);
  const double p = frequency(i);
  const double z2 = z * z;
  const double centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / (1.0 + z2 / n);
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double binomial_standard_error(double p, std::uint64_t n) {
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

double max_standard_score(const EmpiricalDist& e, const Distribution& p) {
  if (e.size() != p.size()) throw Error(ErrorCode::AlphabetMismatch, "empirical and reference alphabets differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double diff = std::abs(e.frequency(i) - p[i]);
    const double se = binomial_standard_error(p[i], e.total());
    if (se == 0.0) {
      if (diff > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    worst = std::max(worst, diff / se);
  }
  return worst;
}

namespace {

// Runs `draw(stream) -> outcome` once per replica and tallies outcomes.
template <class Draw>
EmpiricalDist run_replicas(std::size_t outcomes, const SimConfig& cfg, Draw&& draw) {
  validate_config(cfg);
  const unsigned workers = resolve_workers(cfg.workers);
  std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(outcomes, 0));
  parallel_blocks(static_cast<std::size_t>(cfg.replicas), workers, [&](std::size_t begin, std::size_t end, unsigned w) {
    auto& counts = partial[w];
    for (std::size_t r = begin; r < end; ++r) {
      ReplicaStream rng(cfg.seed, cfg.stream, r);
      ++counts[draw(rng)];
    }
  });
  std::vector<std::uint64_t> total(outcomes, 0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < outcomes; ++i) total[i] += p[i];
  return EmpiricalDist(std::move(total));
}

std::vector<std::vector<double>> row_tables(const CollapseFamily& family, double elapsed) {
  std::vector<std::vector<double>> rows;
  for (std::size_t a = 0; a < family.alphabet_size(); ++a) rows.push_back(cumulative_of(family.row(a, elapsed)));
  return rows;
}

}  // namespace

EmpiricalDist simulate_single(const CollapseFamily& family, const Distribution& p0, double elapsed,
                              const SimConfig& cfg) {
  if (!(elapsed >= 0.0)) throw Error(ErrorCode::TimeBeforeTrigger, "probe precedes the trigger");
  if (p0.size() != family.alphabet_size() || max_abs_difference(p0, family.prior()) > 1e-12)
    throw Error(ErrorCode::PriorMismatch, "prior differs from the family's bound prior");
  const auto prior = cumulative_of(p0.weights());
  const auto rows = row_tables(family, elapsed);
  return run_replicas(p0.size(), cfg, [&](ReplicaStream& rng) {
    const std::size_t latent = sample_categorical(prior, rng.next_uniform());
    return sample_categorical(rows[latent], rng.next_uniform());
  });
}

EmpiricalDist simulate_twobox(const TwoBoxScenario& scenario, const Schedule& schedule, const SimConfig& cfg) {
  validate_schedule(schedule);
  const auto prior = cumulative_of(scenario.prior().weights());
  const auto rows = row_tables(scenario.family(), schedule.elapsed());
  const bool triggered = schedule.x == 1;
  return run_replicas(scenario.prior().size(), cfg, [&](ReplicaStream& rng) {
    const std::size_t latent = sample_categorical(prior, rng.next_uniform());
    const double u = rng.next_uniform();
    return triggered ? sample_categorical(rows[latent], u) : latent;
  });
}

EmpiricalDist simulate_window(const TwoBoxScenario& scenario, const WindowSpec& window, const SimConfig& cfg, int x) {
  if (x != 0 && x != 1) throw Error(ErrorCode::InvalidConfig, "Alice's choice must be 0 or 1");
  const CollapseFamily& f = scenario.family();
  const auto prior = cumulative_of(scenario.prior().weights());
  const std::size_t n = scenario.prior().size();
  return run_replicas(n, cfg, [&](ReplicaStream& rng) {
    const double t_alice = window.quantile(rng.next_uniform());
    const double t_bob = window.quantile(rng.next_uniform());
    const std::size_t latent = sample_categorical(prior, rng.next_uniform());
    const double u = rng.next_uniform();
    const double elapsed = t_bob - t_alice;
    if (x == 0 || elapsed < 0.0 || (elapsed >= f.max_duration() && elapsed > 0.0)) return latent;
    return sample_categorical(cumulative_of(f.row(latent, elapsed)), u);
  });
}

}  // namespace cbox
