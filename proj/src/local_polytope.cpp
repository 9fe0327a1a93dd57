#include <cmath>
#include <limits>

#include "collapse_box/behaviors.hpp"

namespace cbox {
namespace {

constexpr double kMaxStrategies = 1e7;
constexpr double kPivotEps = 1e-12;

double strategy_count(std::size_t outputs, std::size_t inputs) {
  return std::pow(static_cast<double>(outputs), static_cast<double>(inputs));
}

// Digits of `index` in base `outputs`, least significant first, one per input.
std::vector<std::size_t> decode_strategy(std::size_t index, std::size_t outputs, std::size_t inputs) {
  std::vector<std::size_t> out(inputs);
  for (std::size_t i = 0; i < inputs; ++i) {
    out[i] = index % outputs;
    index /= outputs;
  }
  return out;
}

struct PhaseOneResult {
  Eigen::VectorXd weights;
  Eigen::VectorXd dual;
  double objective = 0.0;
};

// Phase-one simplex on  min 1's  s.t.  A w + s = rhs,  w, s >= 0  (rhs >= 0),
// with Bland's rule. Returns the primal weights, the dual vector and the
// optimal infeasibility.
PhaseOneResult phase_one(const Eigen::MatrixXd& A, const Eigen::VectorXd& rhs) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  const Eigen::Index cols = n + m;

  Eigen::MatrixXd tab(m, cols + 1);
  tab.leftCols(n) = A;
  tab.block(0, n, m, m).setIdentity();
  tab.col(cols) = rhs;

  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;

  // Reduced costs: artificials cost 1, structurals 0.
  Eigen::RowVectorXd reduced(cols + 1);
  reduced.setZero();
  reduced.head(n) = -A.colwise().sum();
  reduced(cols) = -rhs.sum();

  const std::size_t max_iter = 50 * static_cast<std::size_t>(cols + m) + 1000;
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (reduced(j) < -kPivotEps) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = tab(i, enter);
      if (a <= kPivotEps) continue;
      const double ratio = tab(i, cols) / a;
      if (ratio < best - 1e-15 ||
          (std::abs(ratio - best) <= 1e-15 && leave >= 0 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        best = ratio;
        leave = i;
      }
    }
    // Phase one is bounded below by zero, so an unbounded direction cannot occur.
    if (leave < 0) break;

    tab.row(leave) /= tab(leave, enter);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (i != leave && tab(i, enter) != 0.0) tab.row(i) -= tab(i, enter) * tab.row(leave);
    }
    reduced -= reduced(enter) * tab.row(leave);
    basis[static_cast<std::size_t>(leave)] = enter;
  }

  PhaseOneResult res;
  res.weights = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index var = basis[static_cast<std::size_t>(i)];
    if (var < n) res.weights(var) = std::max(0.0, tab(i, cols));
  }
  res.objective = -reduced(cols);
  // reduced cost of artificial i is 1 - y_i
  res.dual = (Eigen::VectorXd::Ones(m) - reduced.segment(n, m).transpose());
  return res;
}

}  // namespace

Eigen::MatrixXd deterministic_vertices(const Alphabets& d) {
  const double alice_count = strategy_count(d.a, d.x);
  const double bob_count = strategy_count(d.b, d.y);
  if (alice_count * bob_count > kMaxStrategies)
    throw Error(ErrorCode::ScenarioTooLarge, "more than 1e7 deterministic strategies");

  const auto na = static_cast<std::size_t>(alice_count);
  const auto nb = static_cast<std::size_t>(bob_count);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.table_size()),
                                            static_cast<Eigen::Index>(na * nb));
  for (std::size_t i = 0; i < na; ++i) {
    const auto alice = decode_strategy(i, d.a, d.x);
    for (std::size_t j = 0; j < nb; ++j) {
      const auto bob = decode_strategy(j, d.b, d.y);
      const auto col = static_cast<Eigen::Index>(i * nb + j);
      for (std::size_t x = 0; x < d.x; ++x)
        for (std::size_t y = 0; y < d.y; ++y)
          v(static_cast<Eigen::Index>(((x * d.y + y) * d.a + alice[x]) * d.b + bob[y]), col) = 1.0;
    }
  }
  return v;
}

LocalityReport is_local(const BoxBehavior& box, double tol) {
  LocalityReport report;
  report.vertices = deterministic_vertices(box.dims());
  const Eigen::VectorXd& p = box.table();

  PhaseOneResult lp = phase_one(report.vertices, p);
  report.residual = (report.vertices * lp.weights - p).cwiseAbs().maxCoeff();
  report.member = report.residual <= tol;
  if (report.member) {
    report.weights = std::move(lp.weights);
  } else {
    report.facet.coefficients = std::move(lp.dual);
    report.facet.bound = 0.0;
    report.facet.value = report.facet.coefficients.dot(p);
  }
  return report;
}

}  // namespace cbox
