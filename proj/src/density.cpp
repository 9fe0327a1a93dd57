#include <algorithm>
#include <cmath>

#include "collapse_box/scenarios.hpp"

namespace cbox {

TimeDensity TimeDensity::uniform() { return {}; }

TimeDensity TimeDensity::truncated_exponential(double rate) {
  if (!std::isfinite(rate)) throw Error(ErrorCode::InvalidWindow, "exponential rate must be finite");
  TimeDensity d;
  d.kind_ = rate == 0.0 ? DensityKind::uniform : DensityKind::truncated_exponential;
  d.rate_ = rate;
  return d;
}

TimeDensity TimeDensity::table(std::vector<double> times, std::vector<double> values) {
  if (times.size() < 2 || times.size() != values.size())
    throw Error(ErrorCode::InvalidWindow, "density table needs >= 2 matching times and values");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i]) || values[i] < 0.0)
      throw Error(ErrorCode::InvalidWindow, "density table entries must be finite, values >= 0");
    if (i > 0 && !(times[i] > times[i - 1]))
      throw Error(ErrorCode::InvalidWindow, "density table times must be strictly increasing");
  }
  TimeDensity d;
  d.kind_ = DensityKind::table;
  d.times_ = std::move(times);
  d.values_ = std::move(values);
  return d;
}

WindowSpec::WindowSpec(double length, TimeDensity density) : length_(length), density_(std::move(density)) {
  if (!std::isfinite(length_) || length_ <= 0.0) throw Error(ErrorCode::InvalidWindow, "window length must be > 0");
  if (density_.kind() == DensityKind::table) {
    const auto& t = density_.times();
    const auto& v = density_.values();
    if (t.front() < 0.0 || t.back() > length_)
      throw Error(ErrorCode::InvalidWindow, "density table extends outside the window");
    cumulative_.assign(t.size(), 0.0);
    for (std::size_t i = 1; i < t.size(); ++i)
      cumulative_[i] = cumulative_[i - 1] + 0.5 * (v[i - 1] + v[i]) * (t[i] - t[i - 1]);
    if (std::abs(cumulative_.back() - 1.0) > kNormalizationTolerance)
      throw Error(ErrorCode::InvalidWindow, "density table integrates to " + std::to_string(cumulative_.back()));
  }
}

double WindowSpec::pdf(double t) const {
  if (t < 0.0 || t > length_) return 0.0;
  switch (density_.kind()) {
    case DensityKind::uniform:
      return 1.0 / length_;
    case DensityKind::truncated_exponential: {
      const double k = density_.rate();
      return k * std::exp(-k * t) / -std::expm1(-k * length_);
    }
    case DensityKind::table: {
      const auto& ts = density_.times();
      const auto& vs = density_.values();
      if (t < ts.front() || t > ts.back()) return 0.0;
      auto it = std::upper_bound(ts.begin(), ts.end(), t);
      if (it == ts.end()) return vs.back();
      const auto k = static_cast<std::size_t>(it - ts.begin());
      const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
      return (1.0 - w) * vs[k - 1] + w * vs[k];
    }
  }
  return 0.0;
}

double WindowSpec::cdf(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= length_) return 1.0;
  switch (density_.kind()) {
    case DensityKind::uniform:
      return t / length_;
    case DensityKind::truncated_exponential: {
      const double k = density_.rate();
      return std::expm1(-k * t) / std::expm1(-k * length_);
    }
    case DensityKind::table: {
      const auto& ts = density_.times();
      const auto& vs = density_.values();
      if (t <= ts.front()) return 0.0;
      if (t >= ts.back()) return 1.0;
      const auto k = static_cast<std::size_t>(std::upper_bound(ts.begin(), ts.end(), t) - ts.begin());
      const double h = t - ts[k - 1];
      return cumulative_[k - 1] + 0.5 * (vs[k - 1] + pdf(t)) * h;
    }
  }
  return 0.0;
}

double WindowSpec::quantile(double u) const {
  u = std::clamp(u, 0.0, 1.0);
  switch (density_.kind()) {
    case DensityKind::uniform:
      return u * length_;
    case DensityKind::truncated_exponential: {
      const double k = density_.rate();
      return std::min(length_, -std::log1p(u * std::expm1(-k * length_)) / k);
    }
    case DensityKind::table: {
      const auto& ts = density_.times();
      const auto& vs = density_.values();
      auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      if (it == cumulative_.end()) return ts.back();
      if (it == cumulative_.begin()) return ts.front();
      const auto k = static_cast<std::size_t>(it - cumulative_.begin());
      const double r = u - cumulative_[k - 1];
      if (r <= 0.0) return ts[k - 1];
      const double h = ts[k] - ts[k - 1];
      const double g0 = vs[k - 1];
      const double slope = (vs[k] - g0) / h;
      double step;
      if (std::abs(slope) * h <= 1e-12 * std::max(g0, 1e-300)) {
        step = r / g0;
      } else {
        // g0 s + slope s^2 / 2 = r, stable root
        const double disc = std::max(0.0, g0 * g0 + 2.0 * slope * r);
        step = 2.0 * r / (g0 + std::sqrt(disc));
      }
      return std::clamp(ts[k - 1] + step, ts[k - 1], ts[k]);
    }
  }
  return 0.0;
}

std::vector<double> WindowSpec::breakpoints() const {
  if (density_.kind() != DensityKind::table) return {};
  return density_.times();
}

}  // namespace cbox
