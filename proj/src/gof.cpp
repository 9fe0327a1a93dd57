#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/special_functions/gamma.hpp>

#include "collapse_box/mc.hpp"

namespace cbox {
namespace {

constexpr double kMinExpected = 5.0;
constexpr double kMaxEnumeration = 5e6;
// Relative slack when ranking outcomes as "at most as likely" as the observed one.
constexpr double kLikelihoodSlack = 1e-7;

double log_choose_count(std::uint64_t n, std::size_t k) {
  // log C(n + k - 1, k - 1): number of count vectors summing to n over k cells
  return std::lgamma(static_cast<double>(n + k)) - std::lgamma(static_cast<double>(n + 1)) -
         std::lgamma(static_cast<double>(k));
}

struct ExactEnumerator {
  const std::vector<double>& log_p;
  double log_observed;
  std::uint64_t n;
  double tail = 0.0;

  void visit(std::size_t cell, std::uint64_t remaining, double partial) {
    const std::size_t k = log_p.size();
    if (cell + 1 == k) {
      const double lp = partial + static_cast<double>(remaining) * log_p[cell] -
                        std::lgamma(static_cast<double>(remaining) + 1.0);
      const double full = lp + std::lgamma(static_cast<double>(n) + 1.0);
      if (full <= log_observed + kLikelihoodSlack) tail += std::exp(full);
      return;
    }
    for (std::uint64_t c = 0; c <= remaining; ++c) {
      visit(cell + 1, remaining - c,
            partial + static_cast<double>(c) * log_p[cell] - std::lgamma(static_cast<double>(c) + 1.0));
    }
  }
};

double log_multinomial(const std::vector<std::uint64_t>& counts, const std::vector<double>& log_p, std::uint64_t n) {
  double s = std::lgamma(static_cast<double>(n) + 1.0);
  for (std::size_t i = 0; i < counts.size(); ++i)
    s += static_cast<double>(counts[i]) * log_p[i] - std::lgamma(static_cast<double>(counts[i]) + 1.0);
  return s;
}

}  // namespace

std::string_view to_string(GofMethod m) noexcept {
  switch (m) {
    case GofMethod::pearson: return "pearson";
    case GofMethod::exact_multinomial: return "exact-multinomial";
    case GofMethod::pearson_large_fallback: return "pearson-small-expected";
  }
  return "unknown";
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  if (!std::isfinite(statistic)) return 0.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

GofReport gof_test(const EmpiricalDist& e, const Distribution& p, double alpha) {
  if (e.size() != p.size()) throw Error(ErrorCode::AlphabetMismatch, "empirical and reference alphabets differ");
  GofReport report;
  const auto n = e.total();
  if (n == 0) return report;

  std::vector<std::uint64_t> counts;
  std::vector<double> probs;
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (p[i] > 0.0) {
      counts.push_back(e.counts()[i]);
      probs.push_back(p[i]);
    } else if (e.counts()[i] > 0) {
      // mass where the reference has none
      report.statistic = std::numeric_limits<double>::infinity();
      report.p_value = 0.0;
      report.dof = 0;
      report.reject = true;
      return report;
    }
  }
  const double nd = static_cast<double>(n);
  report.dof = counts.size() - 1;

  double chi2 = 0.0;
  bool small = false;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expected = nd * probs[i];
    const double d = static_cast<double>(counts[i]) - expected;
    chi2 += d * d / expected;
    small = small || expected < kMinExpected;
  }
  report.statistic = chi2;

  if (small && counts.size() > 1) {
    if (log_choose_count(n, counts.size()) <= std::log(kMaxEnumeration)) {
      std::vector<double> log_p(probs.size());
      std::transform(probs.begin(), probs.end(), log_p.begin(), [](double q) { return std::log(q); });
      ExactEnumerator en{log_p, log_multinomial(counts, log_p, n), n, 0.0};
      en.visit(0, n, 0.0);
      report.p_value = std::min(1.0, en.tail);
      report.method = GofMethod::exact_multinomial;
    } else {
      report.p_value = chi_square_sf(chi2, static_cast<double>(report.dof));
      report.method = GofMethod::pearson_large_fallback;
    }
  } else {
    report.p_value = chi_square_sf(chi2, static_cast<double>(report.dof));
  }
  report.reject = report.p_value < alpha;
  return report;
}

GofReport homogeneity_test(const EmpiricalDist& first, const EmpiricalDist& second, double alpha) {
  if (first.size() != second.size()) throw Error(ErrorCode::AlphabetMismatch, "samples over different alphabets");
  GofReport report;
  const double n1 = static_cast<double>(first.total());
  const double n2 = static_cast<double>(second.total());
  const double n = n1 + n2;
  if (n1 == 0.0 || n2 == 0.0) return report;

  std::size_t columns = 0;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < first.size(); ++i) {
    const double c1 = static_cast<double>(first.counts()[i]);
    const double c2 = static_cast<double>(second.counts()[i]);
    const double pooled = c1 + c2;
    if (pooled == 0.0) continue;
    ++columns;
    const double e1 = n1 * pooled / n, e2 = n2 * pooled / n;
    chi2 += (c1 - e1) * (c1 - e1) / e1 + (c2 - e2) * (c2 - e2) / e2;
  }
  report.statistic = chi2;
  report.dof = columns > 0 ? columns - 1 : 0;
  report.p_value = chi_square_sf(chi2, static_cast<double>(report.dof));
  report.reject = report.p_value < alpha;
  return report;
}

}  // namespace cbox
