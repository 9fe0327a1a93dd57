#include "collapse_box/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace cbox {
namespace {

struct Panel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

class Adapter {
 public:
  Adapter(const Integrand& fn, int max_depth) : fn_(fn), max_depth_(max_depth) {}

  double eval(double t) {
    ++result_.evaluations;
    return fn_(t);
  }

  // Endpoints sitting on a breakpoint are sampled one ulp inside the piece,
  // so jumps located exactly at the breakpoint take the one-sided limit.
  void run(double a, double b, double tol, bool inner_left, bool inner_right) {
    if (b <= a) return;
    const double m = 0.5 * (a + b);
    const double fa = eval(inner_left ? std::nextafter(a, b) : a);
    const double fm = eval(m);
    const double fb = eval(inner_right ? std::nextafter(b, a) : b);
    recurse({a, m, b, fa, fm, fb, simpson(a, b, fa, fm, fb)}, tol, 0);
  }

  IntegrationResult result() const { return result_; }
  bool exhausted() const { return exhausted_; }

 private:
  void recurse(const Panel& p, double tol, int depth) {
    const double lm = 0.5 * (p.a + p.m);
    const double rm = 0.5 * (p.m + p.b);
    const double flm = eval(lm), frm = eval(rm);
    const double left = simpson(p.a, p.m, p.fa, flm, p.fm);
    const double right = simpson(p.m, p.b, p.fm, frm, p.fb);
    const double diff = left + right - p.whole;
    const double est = std::abs(diff) / 15.0;
    if (est <= tol || depth >= max_depth_ || p.m <= p.a || p.b <= p.m) {
      if (est > tol) exhausted_ = true;
      result_.value += left + right + diff / 15.0;
      result_.error += est;
      return;
    }
    recurse({p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol, depth + 1);
    recurse({p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth + 1);
  }

  const Integrand& fn_;
  int max_depth_;
  IntegrationResult result_;
  bool exhausted_ = false;
};

}  // namespace

IntegrationResult integrate(const Integrand& fn, double a, double b, const QuadratureOptions& opts) {
  if (!(a <= b)) throw Error(ErrorCode::QuadratureFailure, "integration bounds out of order");
  if (a == b) return {};

  std::vector<double> cuts{a};
  bool jump_at_a = false, jump_at_b = false;
  for (double bp : opts.breakpoints) {
    if (bp > a && bp < b) cuts.push_back(bp);
    jump_at_a = jump_at_a || bp == a;
    jump_at_b = jump_at_b || bp == b;
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  Adapter adapter(fn, opts.max_depth);
  const double width = b - a;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double share = opts.tol * (cuts[i + 1] - cuts[i]) / width;
    adapter.run(cuts[i], cuts[i + 1], share, i > 0 || jump_at_a, i + 2 < cuts.size() || jump_at_b);
  }
  if (adapter.exhausted())
    throw QuadratureError("maximum bisection depth reached", adapter.result());
  return adapter.result();
}

IntegrationResult integrate(const Integrand& fn, double a, double b, double tol) {
  QuadratureOptions opts;
  opts.tol = tol;
  return integrate(fn, a, b, opts);
}

IntegrationResult integrate2(const Integrand2& fn, const Region& region, const QuadratureOptions& opts) {
  double u0 = 0, u1 = 0, v0 = 0, v1 = 0, delta = 0;
  bool band = false;
  if (const auto* r = std::get_if<Rectangle>(&region)) {
    u0 = r->u0, u1 = r->u1, v0 = r->v0, v1 = r->v1;
  } else {
    const auto& bd = std::get<Band>(region);
    u0 = bd.u0, u1 = bd.u1, v0 = bd.v0, v1 = bd.v1, delta = bd.delta;
    band = true;
  }
  if (!(u0 <= u1) || !(v0 <= v1)) throw Error(ErrorCode::QuadratureFailure, "region bounds out of order");
  if (band && delta <= 0.0) return {};

  std::vector<double> outer_breaks(opts.breakpoints.begin(), opts.breakpoints.end());
  if (band) {
    // Inner limits switch between clamped and sliding at these u.
    outer_breaks.insert(outer_breaks.end(), {v0 - delta, v0 + delta, v1 - delta, v1 + delta});
  }
  const double width = std::max(u1 - u0, 1e-300);
  const double inner_tol = 0.1 * opts.tol / width;

  double inner_error = 0.0;
  std::size_t inner_evals = 0;
  auto inner = [&](double u) {
    const double lo = band ? std::max(v0, u - delta) : v0;
    const double hi = band ? std::min(v1, u + delta) : v1;
    if (hi <= lo) return 0.0;
    QuadratureOptions io;
    io.tol = inner_tol;
    io.max_depth = opts.max_depth;
    io.breakpoints = opts.breakpoints;
    IntegrationResult r = integrate([&](double v) { return fn(u, v); }, lo, hi, io);
    inner_error = std::max(inner_error, r.error);
    inner_evals += r.evaluations;
    return r.value;
  };

  QuadratureOptions oo;
  oo.tol = 0.9 * opts.tol;
  oo.max_depth = opts.max_depth;
  oo.breakpoints = outer_breaks;
  IntegrationResult out = integrate(inner, u0, u1, oo);
  out.error += inner_error * width;
  out.evaluations = inner_evals;
  return out;
}

}  // namespace cbox
