#pragma once

// Adaptive Simpson integration in one dimension and nested over rectangles
// or diagonal bands in two.

#include <cstddef>
#include <functional>
#include <span>
#include <variant>

#include "collapse_box/error.hpp"

namespace cbox {

struct IntegrationResult {
  double value = 0.0;
  double error = 0.0;  // always >= 0
  std::size_t evaluations = 0;
};

/// Raised when bisection depth runs out before the local error target is met.
/// Carries the best value found.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, IntegrationResult best)
      : Error(ErrorCode::MaxDepthExceeded, what), best_(best) {}
  const IntegrationResult& best() const noexcept { return best_; }

 private:
  IntegrationResult best_;
};

struct QuadratureOptions {
  double tol = 1e-9;
  int max_depth = 50;
  /// Interior points where the integrand may have kinks; the interval is
  /// split there before adaptation.
  std::span<const double> breakpoints = {};
};

using Integrand = std::function<double(double)>;
using Integrand2 = std::function<double(double, double)>;

IntegrationResult integrate(const Integrand& fn, double a, double b, const QuadratureOptions& opts = {});
IntegrationResult integrate(const Integrand& fn, double a, double b, double tol);

struct Rectangle {
  double u0, u1, v0, v1;
};

/// Points of [u0,u1] x [v0,v1] with |u - v| < delta.
struct Band {
  double u0, u1, v0, v1, delta;
};

using Region = std::variant<Rectangle, Band>;

/// Nested integral, outer over u and inner over v. For bands the inner
/// limits are [max(v0, u-delta), min(v1, u+delta)].
IntegrationResult integrate2(const Integrand2& fn, const Region& region, const QuadratureOptions& opts = {});

}  // namespace cbox
