#include "collapse_box/behaviors.hpp"

#include <cmath>
#include <sstream>

namespace cbox {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyAlphabet: return "EmptyAlphabet";
    case ErrorCode::NegativeWeight: return "NegativeWeight";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::AlphabetMismatch: return "AlphabetMismatch";
    case ErrorCode::InvalidBehavior: return "InvalidBehavior";
    case ErrorCode::ScenarioTooLarge: return "ScenarioTooLarge";
    case ErrorCode::WrongScenarioShape: return "WrongScenarioShape";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::BoundaryViolation: return "BoundaryViolation";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::TimeBeforeTrigger: return "TimeBeforeTrigger";
    case ErrorCode::TimeOutsideWindow: return "TimeOutsideWindow";
    case ErrorCode::PriorMismatch: return "PriorMismatch";
    case ErrorCode::NegativeElapsed: return "NegativeElapsed";
    case ErrorCode::InvalidWindow: return "InvalidWindow";
    case ErrorCode::FormulaInconsistency: return "FormulaInconsistency";
    case ErrorCode::MaxDepthExceeded: return "MaxDepthExceeded";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

std::vector<double> Distribution::to_vector() const {
  return {weights_.data(), weights_.data() + weights_.size()};
}

Distribution Distribution::delta(std::size_t size, std::size_t outcome) {
  if (size == 0) throw Error(ErrorCode::EmptyAlphabet, "delta over empty alphabet");
  if (outcome >= size) throw Error(ErrorCode::AlphabetMismatch, "delta outcome out of range");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  w(static_cast<Eigen::Index>(outcome)) = 1.0;
  return Distribution(std::move(w));
}

Distribution make_distribution(const Eigen::VectorXd& weights, double tol) {
  if (weights.size() == 0) throw Error(ErrorCode::EmptyAlphabet, "distribution has no outcomes");
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights(i)) || weights(i) < 0.0) {
      std::ostringstream os;
      os << "weight[" << i << "] = " << weights(i);
      throw Error(ErrorCode::NegativeWeight, os.str());
    }
  }
  const double sum = weights.sum();
  if (std::abs(sum - 1.0) > tol) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << sum;
    throw Error(ErrorCode::NotNormalized, os.str());
  }
  return Distribution(weights);
}

Distribution make_distribution(std::span<const double> weights, double tol) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(weights.size()));
  for (std::size_t i = 0; i < weights.size(); ++i) w(static_cast<Eigen::Index>(i)) = weights[i];
  return make_distribution(w, tol);
}

Distribution make_distribution(std::initializer_list<double> weights) {
  return make_distribution(std::span<const double>(weights.begin(), weights.size()));
}

double tv_distance(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::AlphabetMismatch, "tv_distance alphabet sizes differ");
  return 0.5 * (p.weights() - q.weights()).cwiseAbs().sum();
}

double max_abs_difference(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::AlphabetMismatch, "alphabet sizes differ");
  return (p.weights() - q.weights()).cwiseAbs().maxCoeff();
}

BoxBehavior::BoxBehavior(Alphabets dims, Eigen::VectorXd table, double tol)
    : dims_(dims), table_(std::move(table)) {
  if (dims_.a == 0 || dims_.b == 0 || dims_.x == 0 || dims_.y == 0)
    throw Error(ErrorCode::EmptyAlphabet, "box behavior with an empty alphabet");
  if (static_cast<std::size_t>(table_.size()) != dims_.table_size())
    throw Error(ErrorCode::InvalidBehavior, "table size does not match alphabets");
  for (Eigen::Index i = 0; i < table_.size(); ++i) {
    if (!std::isfinite(table_(i)) || table_(i) < 0.0)
      throw Error(ErrorCode::NegativeWeight, "negative or non-finite table entry");
  }
  const auto block = static_cast<Eigen::Index>(dims_.a * dims_.b);
  for (std::size_t xy = 0; xy < dims_.x * dims_.y; ++xy) {
    const double sum = table_.segment(static_cast<Eigen::Index>(xy) * block, block).sum();
    if (std::abs(sum - 1.0) > tol) {
      std::ostringstream os;
      os << "P(.,.|x=" << xy / dims_.y << ",y=" << xy % dims_.y << ") sums to " << sum;
      throw Error(ErrorCode::NotNormalized, os.str());
    }
  }
}

double BoxBehavior::alice_marginal(std::size_t a, std::size_t x, std::size_t y) const {
  double s = 0.0;
  for (std::size_t b = 0; b < dims_.b; ++b) s += (*this)(a, b, x, y);
  return s;
}

double BoxBehavior::bob_marginal(std::size_t b, std::size_t x, std::size_t y) const {
  double s = 0.0;
  for (std::size_t a = 0; a < dims_.a; ++a) s += (*this)(a, b, x, y);
  return s;
}

BoxBehavior pr_box() {
  Alphabets dims;
  Eigen::VectorXd t(16);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
          t(static_cast<Eigen::Index>(((x * 2 + y) * 2 + a) * 2 + b)) = ((a ^ b) == (x & y)) ? 0.5 : 0.0;
  return BoxBehavior(dims, std::move(t));
}

BoxBehavior uniform_box() { return BoxBehavior(Alphabets{}, Eigen::VectorXd::Constant(16, 0.25)); }

BoxBehavior deterministic_box(const Alphabets& dims, std::span<const std::size_t> alice,
                              std::span<const std::size_t> bob) {
  if (alice.size() != dims.x || bob.size() != dims.y)
    throw Error(ErrorCode::AlphabetMismatch, "strategy length does not match input alphabet");
  Eigen::VectorXd t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dims.table_size()));
  for (std::size_t x = 0; x < dims.x; ++x) {
    for (std::size_t y = 0; y < dims.y; ++y) {
      if (alice[x] >= dims.a || bob[y] >= dims.b)
        throw Error(ErrorCode::AlphabetMismatch, "strategy output out of range");
      t(static_cast<Eigen::Index>(((x * dims.y + y) * dims.a + alice[x]) * dims.b + bob[y])) = 1.0;
    }
  }
  return BoxBehavior(dims, std::move(t));
}

NonSignalingReport is_nonsignaling(const BoxBehavior& box, double tol) {
  const auto& d = box.dims();
  NonSignalingReport report;
  auto record = [&](double diff, const std::string& where) {
    if (diff > report.max_violation) {
      report.max_violation = diff;
      report.violating_marginal = where;
    }
  };
  // Alice's marginal must not depend on y.
  for (std::size_t x = 0; x < d.x; ++x) {
    for (std::size_t a = 0; a < d.a; ++a) {
      for (std::size_t y = 1; y < d.y; ++y) {
        for (std::size_t y0 = 0; y0 < y; ++y0) {
          const double diff = std::abs(box.alice_marginal(a, x, y) - box.alice_marginal(a, x, y0));
          std::ostringstream os;
          os << "P_A(a=" << a << "|x=" << x << ") differs between y=" << y0 << " and y=" << y;
          record(diff, os.str());
        }
      }
    }
  }
  for (std::size_t y = 0; y < d.y; ++y) {
    for (std::size_t b = 0; b < d.b; ++b) {
      for (std::size_t x = 1; x < d.x; ++x) {
        for (std::size_t x0 = 0; x0 < x; ++x0) {
          const double diff = std::abs(box.bob_marginal(b, x, y) - box.bob_marginal(b, x0, y));
          std::ostringstream os;
          os << "P_B(b=" << b << "|y=" << y << ") differs between x=" << x0 << " and x=" << x;
          record(diff, os.str());
        }
      }
    }
  }
  report.pass = report.max_violation <= tol;
  return report;
}

double chsh_value(const BoxBehavior& box) {
  if (!(box.dims() == Alphabets{}))
    throw Error(ErrorCode::WrongScenarioShape, "CHSH needs two inputs and two outputs per party");
  auto correlator = [&](std::size_t x, std::size_t y) {
    double e = 0.0;
    for (std::size_t a = 0; a < 2; ++a)
      for (std::size_t b = 0; b < 2; ++b) e += ((a ^ b) ? -1.0 : 1.0) * box(a, b, x, y);
    return e;
  };
  return correlator(0, 0) + correlator(0, 1) + correlator(1, 0) - correlator(1, 1);
}

}  // namespace cbox
