#include "collapse_box/signaling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "collapse_box/parallel.hpp"

namespace cbox {

std::string_view to_string(Verdict v) noexcept {
  return v == Verdict::signaling ? "signaling" : "non-signaling";
}

std::uint64_t point_seed(std::uint64_t seed, std::size_t index) noexcept {
  return mix64(seed + static_cast<std::uint64_t>(index));
}

TvEstimate empirical_tv(const EmpiricalDist& first, const EmpiricalDist& second) {
  if (first.size() != second.size()) throw Error(ErrorCode::AlphabetMismatch, "samples over different alphabets");
  const Eigen::VectorXd f0 = first.frequencies();
  const Eigen::VectorXd f1 = second.frequencies();
  const Eigen::VectorXd d = f1 - f0;
  const Eigen::VectorXd s = d.unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });

  // Var(sum_i s_i f_i) for a multinomial frequency vector f.
  auto branch_var = [&](const Eigen::VectorXd& f, std::uint64_t n) {
    if (n == 0) return 0.0;
    const double m1 = s.cwiseProduct(s).dot(f);
    const double m0 = s.dot(f);
    return std::max(0.0, m1 - m0 * m0) / static_cast<double>(n);
  };
  TvEstimate est;
  est.value = 0.5 * d.cwiseAbs().sum();
  const double se = 0.5 * std::sqrt(branch_var(f0, first.total()) + branch_var(f1, second.total()));
  est.lo = std::max(0.0, est.value - 1.959963984540054 * se);
  est.hi = std::min(1.0, est.value + 1.959963984540054 * se);
  return est;
}

WitnessReport assess(const Distribution& reference, const Distribution& probe, const EmpiricalDist& empirical_reference,
                     const EmpiricalDist& empirical_probe, const WitnessOptions& opts) {
  WitnessReport r;
  r.analytic_reference = reference;
  r.analytic_probe = probe;
  r.tv_analytic = tv_distance(reference, probe);
  const TvEstimate tv = empirical_tv(empirical_reference, empirical_probe);
  r.tv_empirical = tv.value;
  r.ci_lo = tv.lo;
  r.ci_hi = tv.hi;
  const GofReport test = homogeneity_test(empirical_reference, empirical_probe, opts.alpha);
  r.p_value = test.p_value;
  r.empirical_reject = test.reject;
  r.verdict = (r.tv_analytic > opts.tol && test.reject) ? Verdict::signaling : Verdict::non_signaling;
  return r;
}

namespace {

SimConfig with_stream(SimConfig cfg, std::uint64_t offset) {
  cfg.stream += offset;
  return cfg;
}

}  // namespace

WitnessReport witness(const TwoBoxScenario& scenario, double elapsed, const WitnessOptions& opts) {
  const Distribution ref = bob_marginal(scenario, 0, elapsed);
  const Distribution probe = bob_marginal(scenario, 1, elapsed);
  const EmpiricalDist e0 = simulate_twobox(scenario, Schedule{0.0, elapsed, 0}, with_stream(opts.sim, 0));
  const EmpiricalDist e1 = simulate_twobox(scenario, Schedule{0.0, elapsed, 1}, with_stream(opts.sim, 1));
  WitnessReport r = assess(ref, probe, e0, e1, opts);
  r.elapsed = elapsed;
  return r;
}

WitnessReport window_witness(const TwoBoxScenario& scenario, const WindowSpec& window, const WitnessOptions& opts) {
  const Distribution ref = window_marginal(scenario, window, 0);
  const Distribution probe = window_marginal(scenario, window, 1);
  const EmpiricalDist e0 = simulate_window(scenario, window, with_stream(opts.sim, 0), 0);
  const EmpiricalDist e1 = simulate_window(scenario, window, with_stream(opts.sim, 1), 1);
  WitnessReport r = assess(ref, probe, e0, e1, opts);
  r.elapsed = window.length();
  return r;
}

WitnessReport single_box_report(const CollapseFamily& family, double elapsed, const WitnessOptions& opts) {
  const Distribution& p0 = family.prior();
  const Distribution probe = marginal_at(family, p0, elapsed);
  const EmpiricalDist e0 = simulate_single(family, p0, 0.0, with_stream(opts.sim, 0));
  const EmpiricalDist e1 = simulate_single(family, p0, elapsed, with_stream(opts.sim, 1));
  WitnessReport r = assess(p0, probe, e0, e1, opts);
  r.elapsed = elapsed;
  return r;
}

std::vector<WitnessReport> witness_sweep(const TwoBoxScenario& scenario, const std::vector<double>& grid,
                                         const WitnessOptions& opts) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "witness sweep grid is empty");
  std::vector<std::optional<WitnessReport>> slots(grid.size());
  std::vector<std::exception_ptr> errors(grid.size());
  const unsigned workers = resolve_workers(opts.sim.workers);

  parallel_blocks(grid.size(), workers, [&](std::size_t begin, std::size_t end, unsigned) {
    for (std::size_t i = begin; i < end; ++i) {
      try {
        WitnessOptions local = opts;
        local.sim.seed = point_seed(opts.sim.seed, i);
        local.sim.workers = grid.size() > 1 ? 1 : opts.sim.workers;
        slots[i] = witness(scenario, grid[i], local);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  });

  std::vector<WitnessReport> out;
  out.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    out.push_back(std::move(*slots[i]));
  }
  return out;
}

InducedChannel::InducedChannel(const Distribution& given_x0, const Distribution& given_x1) {
  if (given_x0.size() != given_x1.size()) throw Error(ErrorCode::AlphabetMismatch, "channel rows differ in length");
  rows_.resize(2, static_cast<Eigen::Index>(given_x0.size()));
  rows_.row(0) = given_x0.weights().transpose();
  rows_.row(1) = given_x1.weights().transpose();
}

double mutual_information(const Eigen::Vector2d& prior, const InducedChannel& channel) {
  const auto& w = channel.matrix();
  const Eigen::RowVectorXd q = prior.transpose() * w;
  double info = 0.0;
  for (Eigen::Index x = 0; x < 2; ++x) {
    if (prior(x) <= 0.0) continue;
    for (Eigen::Index y = 0; y < w.cols(); ++y) {
      if (w(x, y) > 0.0) info += prior(x) * w(x, y) * std::log2(w(x, y) / q(y));
    }
  }
  return std::max(0.0, info);
}

CapacityResult blahut_arimoto(const InducedChannel& channel, double tol, std::size_t max_iterations) {
  const auto& w = channel.matrix();
  Eigen::Vector2d p(0.5, 0.5);
  const double tol_nats = tol * std::log(2.0);

  for (std::size_t it = 1; it <= max_iterations; ++it) {
    const Eigen::RowVectorXd q = p.transpose() * w;
    Eigen::Vector2d c;
    for (Eigen::Index x = 0; x < 2; ++x) {
      double div = 0.0;
      for (Eigen::Index y = 0; y < w.cols(); ++y)
        if (w(x, y) > 0.0) div += w(x, y) * std::log(w(x, y) / q(y));
      c(x) = std::exp(div);
    }
    const double lower = std::log(p.dot(c));
    const double upper = std::log(c.maxCoeff());
    if (upper - lower <= tol_nats) {
      CapacityResult r;
      r.bits = std::max(0.0, lower / std::log(2.0));
      r.optimal_prior = p;
      r.iterations = it;
      return r;
    }
    p = p.cwiseProduct(c) / p.dot(c);
  }
  throw Error(ErrorCode::NonConvergence, "Blahut-Arimoto did not reach the requested tolerance");
}

double channel_capacity(const InducedChannel& channel, double tol) { return blahut_arimoto(channel, tol).bits; }

}  // namespace cbox
