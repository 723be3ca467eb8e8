#include "dnsveil/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dnsveil {

namespace {

[[noreturn]] void fail(StatsErrorKind kind, const std::string& message) {
  static constexpr const char* kCodes[] = {"DegenerateTable", "SingularDenominator", "UnknownBaseline",
                                           "BadArgument"};
  throw StatsError(kind, kCodes[static_cast<int>(kind)], message);
}

double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

RankTable friedman_ranks(const std::vector<std::vector<double>>& accuracy) {
  const int n = static_cast<int>(accuracy.size());
  const int k = n > 0 ? static_cast<int>(accuracy.front().size()) : 0;
  if (n < 2 || k < 2) {
    fail(StatsErrorKind::DegenerateTable, "need at least 2 folds and 2 algorithms, got " + std::to_string(n) +
                                              "x" + std::to_string(k));
  }
  RankTable out;
  out.folds = n;
  out.algorithms = k;
  out.mean_ranks.assign(static_cast<std::size_t>(k), 0.0);
  std::vector<int> order(static_cast<std::size_t>(k));
  for (const auto& row : accuracy) {
    if (static_cast<int>(row.size()) != k) fail(StatsErrorKind::DegenerateTable, "ragged accuracy table");
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return row[a] > row[b]; });
    std::vector<double> ranks(static_cast<std::size_t>(k));
    std::size_t i = 0;
    while (i < order.size()) {
      std::size_t j = i;
      while (j + 1 < order.size() && row[order[j + 1]] == row[order[i]]) ++j;
      // Positions i..j (0-based) hold ranks i+1..j+1.
      const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
      for (std::size_t t = i; t <= j; ++t) ranks[static_cast<std::size_t>(order[t])] = shared;
      i = j + 1;
    }
    for (int a = 0; a < k; ++a) out.mean_ranks[static_cast<std::size_t>(a)] += ranks[static_cast<std::size_t>(a)];
    out.ranks.push_back(std::move(ranks));
  }
  for (auto& r : out.mean_ranks) r /= n;
  return out;
}

RankTable friedman_ranks(const AccuracyTable& table) { return friedman_ranks(table.accuracy); }

double friedman_statistic(const RankTable& ranks) {
  const double n = ranks.folds;
  const double k = ranks.algorithms;
  double sum_sq = 0.0;
  for (double r : ranks.mean_ranks) sum_sq += r * r;
  const double chi2 = 12.0 * n / (k * (k + 1.0)) * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0);
  // Exact ties leave rounding residue around zero.
  return chi2 < 1e-12 ? 0.0 : chi2;
}

double iman_davenport(double chi2_f, int folds, int algorithms) {
  const double n = folds;
  const double denom = n * (algorithms - 1) - chi2_f;
  if (std::fabs(denom) <= 1e-12 * std::max(1.0, n * (algorithms - 1))) {
    fail(StatsErrorKind::SingularDenominator,
         "chi2_F equals N(k-1): the ranking is identical in every fold, reject at any alpha");
  }
  return (n - 1.0) * chi2_f / denom;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) fail(StatsErrorKind::BadArgument, "beta parameters must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_cdf(double x, double d1, double d2) {
  if (x <= 0.0) return 0.0;
  return regularized_incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

double f_survival(double x, double d1, double d2) {
  if (x <= 0.0) return 1.0;
  return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x));
}

double f_critical(double alpha, int d1, int d2) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail(StatsErrorKind::BadArgument, "alpha must lie in (0, 1)");
  if (d1 < 1 || d2 < 1) fail(StatsErrorKind::BadArgument, "degrees of freedom must be positive");
  double lo = 0.0;
  double hi = 1.0;
  while (f_survival(hi, d1, d2) > alpha) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) fail(StatsErrorKind::BadArgument, "critical value out of range");
  }
  while (hi - lo > 1e-10 * std::max(1.0, lo)) {
    const double mid = lo + (hi - lo) / 2.0;
    if (mid <= lo || mid >= hi) break;
    if (f_survival(mid, d1, d2) > alpha) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / 2.0;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

std::vector<PosthocComparison> posthoc_z(const RankTable& ranks, int baseline) {
  if (baseline < 0 || baseline >= ranks.algorithms) fail(StatsErrorKind::UnknownBaseline, "baseline out of range");
  const double k = ranks.algorithms;
  const double se = std::sqrt(k * (k + 1.0) / (6.0 * ranks.folds));
  const double r0 = ranks.mean_ranks[static_cast<std::size_t>(baseline)];
  std::vector<PosthocComparison> out;
  for (int a = 0; a < ranks.algorithms; ++a) {
    if (a == baseline) continue;
    const double z = (ranks.mean_ranks[static_cast<std::size_t>(a)] - r0) / se;
    out.push_back({a, z, std::min(1.0, std::erfc(std::fabs(z) / std::sqrt(2.0)))});
  }
  return out;
}

std::vector<HolmStep> holm_stepdown(const std::vector<double>& pvalues, double alpha) {
  std::vector<HolmStep> steps;
  for (std::size_t i = 0; i < pvalues.size(); ++i) {
    if (!(pvalues[i] >= 0.0 && pvalues[i] <= 1.0)) fail(StatsErrorKind::BadArgument, "p-value outside [0, 1]");
    steps.push_back({i, pvalues[i], 0.0, false});
  }
  std::stable_sort(steps.begin(), steps.end(), [](const HolmStep& a, const HolmStep& b) { return a.p < b.p; });
  const double k = static_cast<double>(pvalues.size()) + 1.0;
  bool still_rejecting = true;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    steps[i].threshold = alpha / (k - static_cast<double>(i + 1));
    still_rejecting = still_rejecting && steps[i].p < steps[i].threshold;
    steps[i].reject = still_rejecting;
  }
  return steps;
}

SignificanceReport run_significance(const AccuracyTable& table, const std::string& baseline_label, double alpha) {
  const auto it = std::find(table.algorithms.begin(), table.algorithms.end(), baseline_label);
  if (it == table.algorithms.end()) {
    fail(StatsErrorKind::UnknownBaseline, "baseline '" + baseline_label + "' is not in the accuracy table");
  }
  const int baseline = static_cast<int>(it - table.algorithms.begin());

  const RankTable ranks = friedman_ranks(table);
  SignificanceReport report;
  report.folds = ranks.folds;
  report.algorithms = ranks.algorithms;
  report.algorithm_labels = table.algorithms;
  report.mean_ranks = ranks.mean_ranks;
  report.alpha = alpha;
  report.baseline_algorithm = baseline_label;
  report.chi2_f = friedman_statistic(ranks);
  report.dof1 = ranks.algorithms - 1;
  report.dof2 = (ranks.algorithms - 1) * (ranks.folds - 1);
  report.f_critical = f_critical(alpha, report.dof1, report.dof2);
  try {
    report.f_f = iman_davenport(report.chi2_f, ranks.folds, ranks.algorithms);
    report.friedman_reject = *report.f_f > report.f_critical;
  } catch (const StatsError& e) {
    if (e.kind() != StatsErrorKind::SingularDenominator) throw;
    report.f_f_singular = true;
    report.friedman_reject = true;
  }
  if (!report.friedman_reject) return report;

  const auto comparisons = posthoc_z(ranks, baseline);
  // Order equal p-values by label so the report does not depend on column order.
  std::vector<std::size_t> by_label(comparisons.size());
  std::iota(by_label.begin(), by_label.end(), std::size_t{0});
  std::stable_sort(by_label.begin(), by_label.end(), [&](std::size_t a, std::size_t b) {
    return table.algorithms[static_cast<std::size_t>(comparisons[a].algorithm)] <
           table.algorithms[static_cast<std::size_t>(comparisons[b].algorithm)];
  });
  std::vector<double> pvalues;
  for (std::size_t i : by_label) pvalues.push_back(comparisons[i].p);
  for (const auto& step : holm_stepdown(pvalues, alpha)) {
    const auto& c = comparisons[by_label[step.index]];
    report.posthoc.push_back({table.algorithms[static_cast<std::size_t>(c.algorithm)],
                              ranks.mean_ranks[static_cast<std::size_t>(c.algorithm)], c.z, c.p, step.threshold,
                              step.reject});
  }
  return report;
}

}  // namespace dnsveil
