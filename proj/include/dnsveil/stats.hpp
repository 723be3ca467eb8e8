#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dnsveil/eval.hpp"

namespace dnsveil {

enum class StatsErrorKind { DegenerateTable, SingularDenominator, UnknownBaseline, BadArgument };
using StatsError = KindedError<StatsErrorKind>;

struct RankTable {
  /// ranks[fold][algorithm]; 1 is best.
  std::vector<std::vector<double>> ranks;
  /// Mean rank of each algorithm over folds.
  std::vector<double> mean_ranks;
  int folds = 0;
  int algorithms = 0;
};

/// Higher accuracy gets the lower rank; ties share the average of their ranks.
RankTable friedman_ranks(const std::vector<std::vector<double>>& accuracy);
RankTable friedman_ranks(const AccuracyTable& table);

/// 12N/(k(k+1)) * (sum_j R_j^2 - k(k+1)^2/4).
double friedman_statistic(const RankTable& ranks);

/// (N-1) chi2 / (N(k-1) - chi2). Throws SingularDenominator when the
/// ranking is perfectly consistent across folds.
double iman_davenport(double chi2_f, int folds, int algorithms);

/// Regularized incomplete beta I_x(a, b), continued fraction by Lentz's method.
double regularized_incomplete_beta(double a, double b, double x);

double f_cdf(double x, double d1, double d2);
/// Upper tail P(F > x).
double f_survival(double x, double d1, double d2);

/// x such that P(F(d1, d2) > x) = alpha, found by bisection.
double f_critical(double alpha, int d1, int d2);

/// Standard normal CDF through erfc.
double normal_cdf(double z);

struct PosthocComparison {
  int algorithm = 0;
  double z = 0.0;
  /// Two-sided: 2 (1 - Phi(|z|)).
  double p = 1.0;
};

/// z_i = (R_i - R_0) / sqrt(k(k+1)/(6N)) for every algorithm except the baseline.
std::vector<PosthocComparison> posthoc_z(const RankTable& ranks, int baseline);

struct HolmStep {
  /// Position of this p-value in the caller's list.
  std::size_t index = 0;
  double p = 1.0;
  /// alpha / (k - i) with i the 1-based sorted position and k = m + 1.
  double threshold = 0.0;
  bool reject = false;
};

/// Holm step-down over m p-values, each compared with one baseline (so k = m + 1).
/// Steps come back in ascending-p order; equal p-values keep input order.
std::vector<HolmStep> holm_stepdown(const std::vector<double>& pvalues, double alpha);

struct PosthocEntry {
  std::string algorithm;
  double mean_rank = 0.0;
  double z = 0.0;
  double p = 1.0;
  double threshold = 0.0;
  bool reject = false;
};

struct SignificanceReport {
  int folds = 0;
  int algorithms = 0;
  std::vector<std::string> algorithm_labels;
  std::vector<double> mean_ranks;
  double chi2_f = 0.0;
  /// Empty when the Iman-Davenport denominator vanishes.
  std::optional<double> f_f;
  bool f_f_singular = false;
  int dof1 = 0;
  int dof2 = 0;
  double f_critical = 0.0;
  bool friedman_reject = false;
  double alpha = 0.05;
  std::string baseline_algorithm;
  std::string posthoc_sides = "two-sided";
  /// Ascending p; empty unless the Friedman null was rejected.
  std::vector<PosthocEntry> posthoc;
};

SignificanceReport run_significance(const AccuracyTable& table, const std::string& baseline_label, double alpha);

}  // namespace dnsveil
