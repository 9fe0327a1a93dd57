#include "collapse_box/collapse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cbox {
namespace {

constexpr double kPriorMatchTolerance = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::InvalidSpec, what);
}

bool valid_time(double t) { return std::isfinite(t) && t >= 0.0; }

// dt_a == 0 collapses immediately after the trigger but the trigger instant
// itself still carries the prior.
bool collapsed(double elapsed, double duration) {
  return duration > 0.0 ? elapsed >= duration : elapsed > 0.0;
}

}  // namespace

std::string_view to_string(FamilyKind kind) noexcept {
  switch (kind) {
    case FamilyKind::instantaneous: return "instantaneous";
    case FamilyKind::linear: return "linear";
    case FamilyKind::exponential: return "exponential";
    case FamilyKind::step: return "step";
    case FamilyKind::table: return "table";
  }
  return "unknown";
}

FamilyKind family_kind_from_string(std::string_view name) {
  for (auto k : {FamilyKind::instantaneous, FamilyKind::linear, FamilyKind::exponential, FamilyKind::step,
                 FamilyKind::table}) {
    if (name == to_string(k)) return k;
  }
  if (name == "custom-table") return FamilyKind::table;
  throw Error(ErrorCode::InvalidSpec, "unknown family kind '" + std::string(name) + "'");
}

std::string_view to_string(BoundaryClause clause) noexcept {
  switch (clause) {
    case BoundaryClause::initial: return "initial (f(tau) = P0)";
    case BoundaryClause::final: return "final (f = delta after dt_a)";
    case BoundaryClause::normalization: return "normalization (sum_a' f = 1)";
    case BoundaryClause::range: return "range (0 <= f <= 1)";
  }
  return "unknown";
}

CollapseFamily::CollapseFamily(FamilySpec spec) : spec_(std::move(spec)) {
  const std::size_t n = spec_.p0.size();
  require(n > 0, "family needs a bound prior");

  switch (spec_.kind) {
    case FamilyKind::instantaneous:
      require(std::all_of(spec_.dt.begin(), spec_.dt.end(), [](double d) { return d == 0.0; }),
              "instantaneous family takes no non-zero durations");
      durations_.assign(n, 0.0);
      break;
    case FamilyKind::linear:
    case FamilyKind::step:
    case FamilyKind::table:
      require(spec_.dt.size() == n, "need one duration per outcome");
      require(std::all_of(spec_.dt.begin(), spec_.dt.end(), valid_time), "durations must be finite and >= 0");
      durations_ = spec_.dt;
      break;
    case FamilyKind::exponential:
      require(spec_.rates.size() == n, "need one rate per outcome");
      durations_.reserve(n);
      for (double r : spec_.rates) {
        require(std::isfinite(r) && r > 0.0, "rates must be finite and > 0");
        durations_.push_back(-std::log(kExponentialCutoffTail) / r);
      }
      break;
  }

  if (spec_.kind == FamilyKind::table) {
    const auto& g = spec_.grid;
    require(!g.times.empty(), "table family needs at least one time");
    require(std::all_of(g.times.begin(), g.times.end(), valid_time), "table times must be finite and >= 0");
    require(std::is_sorted(g.times.begin(), g.times.end()), "table times must be non-decreasing");
    require(g.values.size() == n, "table needs one value block per latent outcome");
    for (const auto& block : g.values) {
      require(static_cast<std::size_t>(block.rows()) == g.times.size() && static_cast<std::size_t>(block.cols()) == n,
              "table block shape must be times x outcomes");
      require(block.allFinite(), "table values must be finite");
    }
  }

  min_duration_ = *std::min_element(durations_.begin(), durations_.end());
  max_duration_ = *std::max_element(durations_.begin(), durations_.end());
}

double CollapseFamily::mixing_weight(std::size_t latent, double elapsed) const {
  const double d = durations_[latent];
  switch (spec_.kind) {
    case FamilyKind::instantaneous:
    case FamilyKind::step:
      return collapsed(elapsed, d) ? 1.0 : 0.0;
    case FamilyKind::linear:
      if (d == 0.0) return elapsed > 0.0 ? 1.0 : 0.0;
      return std::min(elapsed / d, 1.0);
    case FamilyKind::exponential:
      if (elapsed >= d) return 1.0;
      return -std::expm1(-spec_.rates[latent] * elapsed);
    case FamilyKind::table:
      break;
  }
  return 0.0;
}

Eigen::VectorXd CollapseFamily::row(std::size_t latent, double elapsed) const {
  const std::size_t n = alphabet_size();
  if (latent >= n) throw Error(ErrorCode::AlphabetMismatch, "latent outcome out of range");
  if (!(elapsed >= 0.0)) throw Error(ErrorCode::TimeBeforeTrigger, "elapsed time is negative");

  if (spec_.kind == FamilyKind::table) {
    const auto& times = spec_.grid.times;
    const auto& block = spec_.grid.values[latent];
    const auto k = static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), elapsed) - times.begin());
    if (k == 0) return block.row(0).transpose();
    if (k == times.size()) return block.row(static_cast<Eigen::Index>(k - 1)).transpose();
    const double t0 = times[k - 1], t1 = times[k];
    const double w = (elapsed - t0) / (t1 - t0);
    return ((1.0 - w) * block.row(static_cast<Eigen::Index>(k - 1)) + w * block.row(static_cast<Eigen::Index>(k)))
        .transpose();
  }

  const double w = mixing_weight(latent, elapsed);
  Eigen::VectorXd r = (1.0 - w) * spec_.p0.weights();
  r(static_cast<Eigen::Index>(latent)) += w;
  return r;
}

double CollapseFamily::operator()(std::size_t latent, std::size_t output, double elapsed) const {
  if (output >= alphabet_size()) throw Error(ErrorCode::AlphabetMismatch, "output out of range");
  return row(latent, elapsed)(static_cast<Eigen::Index>(output));
}

std::vector<double> CollapseFamily::breakpoints() const {
  std::vector<double> bp = durations_;
  if (spec_.kind == FamilyKind::table) bp.insert(bp.end(), spec_.grid.times.begin(), spec_.grid.times.end());
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
  return bp;
}

CollapseFamily make_family_unchecked(const FamilySpec& spec) { return CollapseFamily(spec); }

CollapseFamily make_family(const FamilySpec& spec) {
  CollapseFamily family(spec);
  const auto grid = default_validation_grid(family);
  const FamilyValidation v = validate_family(family, grid);
  if (!v.pass) {
    std::ostringstream os;
    for (const auto& c : v.clauses) {
      if (c.worst > FamilyValidation::kTolerance)
        os << to_string(c.clause) << " violated by " << c.worst << " at s=" << c.elapsed << "; ";
    }
    throw Error(ErrorCode::BoundaryViolation, os.str());
  }
  return family;
}

CollapseFamily instantaneous_family(const Distribution& p0) {
  return make_family(FamilySpec{FamilyKind::instantaneous, p0, {}, {}, {}});
}

CollapseFamily linear_family(const Distribution& p0, std::vector<double> dt) {
  return make_family(FamilySpec{FamilyKind::linear, p0, std::move(dt), {}, {}});
}

CollapseFamily exponential_family(const Distribution& p0, std::vector<double> rates) {
  return make_family(FamilySpec{FamilyKind::exponential, p0, {}, std::move(rates), {}});
}

CollapseFamily step_family(const Distribution& p0, std::vector<double> dt) {
  return make_family(FamilySpec{FamilyKind::step, p0, std::move(dt), {}, {}});
}

std::vector<double> default_validation_grid(const CollapseFamily& family, std::size_t points) {
  std::vector<double> grid;
  const double top = family.max_duration();
  if (points < 2 || top == 0.0) {
    grid = {0.0, 1.0};
    return grid;
  }
  grid.reserve(points);
  for (std::size_t i = 0; i < points; ++i)
    grid.push_back(top * static_cast<double>(i) / static_cast<double>(points - 1));
  return grid;
}

FamilyValidation validate_family(const CollapseFamily& family, std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "validation grid is empty");

  std::vector<double> points(grid.begin(), grid.end());
  points.push_back(0.0);
  points.insert(points.end(), family.durations().begin(), family.durations().end());
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  FamilyValidation report;
  for (auto c : {BoundaryClause::initial, BoundaryClause::final, BoundaryClause::normalization, BoundaryClause::range})
    report.clauses.push_back({c, 0.0, 0.0, 0, 0});

  auto note = [&](BoundaryClause c, double value, double s, std::size_t a, std::size_t ap) {
    auto& slot = report.clauses[static_cast<std::size_t>(c)];
    if (value > slot.worst) slot = {c, value, s, a, ap};
  };

  const std::size_t n = family.alphabet_size();
  const Distribution& p0 = family.prior();
  for (double s : points) {
    if (s < 0.0) continue;
    for (std::size_t a = 0; a < n; ++a) {
      const Eigen::VectorXd r = family.row(a, s);
      note(BoundaryClause::normalization, std::abs(r.sum() - 1.0), s, a, 0);
      const bool done = collapsed(s, family.durations()[a]);
      for (std::size_t ap = 0; ap < n; ++ap) {
        const double f = r(static_cast<Eigen::Index>(ap));
        if (s == 0.0) note(BoundaryClause::initial, std::abs(f - p0[ap]), s, a, ap);
        if (done) note(BoundaryClause::final, std::abs(f - (a == ap ? 1.0 : 0.0)), s, a, ap);
        note(BoundaryClause::range, std::max({-f, f - 1.0, 0.0}), s, a, ap);
      }
    }
  }
  report.pass = std::all_of(report.clauses.begin(), report.clauses.end(),
                            [](const ClauseViolation& c) { return c.worst <= FamilyValidation::kTolerance; });
  return report;
}

Distribution marginal_at(const CollapseFamily& family, const Distribution& p0, double elapsed) {
  if (!(elapsed >= 0.0)) throw Error(ErrorCode::TimeBeforeTrigger, "probe precedes the trigger");
  if (p0.size() != family.alphabet_size() || max_abs_difference(p0, family.prior()) > kPriorMatchTolerance)
    throw Error(ErrorCode::PriorMismatch, "prior differs from the family's bound prior");

  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p0.size()));
  for (std::size_t a = 0; a < p0.size(); ++a) out += p0[a] * family.row(a, elapsed);
  return make_distribution(out);
}

double single_box_witness(const CollapseFamily& family, const Distribution& p0, double elapsed) {
  if (!(elapsed >= 0.0)) throw Error(ErrorCode::TimeOutsideWindow, "witness time precedes the trigger");
  return tv_distance(marginal_at(family, p0, elapsed), p0);
}

}  // namespace cbox
