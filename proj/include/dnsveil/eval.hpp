#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dnsveil/models.hpp"

namespace dnsveil {

enum class EvalErrorKind { TooFewRows, LengthMismatch, EmptyMatrix, BadFoldCount };
using EvalError = KindedError<EvalErrorKind>;

struct FoldAssignment {
  int k = 0;
  std::vector<int> fold_of_row;
  /// One note per class with fewer than k members.
  std::vector<std::string> warnings;

  std::vector<std::size_t> rows_in(int fold) const;
  std::vector<std::size_t> rows_outside(int fold) const;
};

/// Per-class seeded shuffle, then round-robin dealing that continues across
/// classes, so both overall and per-class fold sizes differ by at most one.
FoldAssignment stratified_kfold(std::span<const TrafficClass> labels, int k, std::uint64_t seed);

/// counts[true][predicted].
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, kClassCount>, kClassCount> counts{};

  std::uint64_t total() const;
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;
};

ConfusionMatrix confusion_matrix(std::span<const TrafficClass> truth, std::span<const TrafficClass> predicted);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  /// False when the denominator was zero and the value was reported as 0.
  bool precision_defined = true;
  bool recall_defined = true;
};

struct Metrics {
  double accuracy = 0.0;
  std::array<ClassMetrics, kClassCount> per_class{};
};

Metrics metrics(const ConfusionMatrix& cm);

enum class ModelKind { Mlp, RandomForest };

struct Algorithm {
  ModelKind model = ModelKind::Mlp;
  FeatureSetKind features = FeatureSetKind::Query;

  /// "mlp-query", "rf-full", ...
  std::string label() const;
};

/// MLP × {query, full, response}, then RF × {query, full, response}.
std::vector<Algorithm> standard_algorithms();

/// accuracy[fold][algorithm].
struct AccuracyTable {
  std::vector<std::string> algorithms;
  std::vector<std::vector<double>> accuracy;

  std::size_t folds() const { return accuracy.size(); }
  std::size_t algorithm_count() const { return algorithms.size(); }
};

struct FeatureSets {
  std::vector<FeatureRow> query;
  std::vector<FeatureRow> full;
  std::vector<FeatureRow> response;

  const std::vector<FeatureRow>& of(FeatureSetKind kind) const;
};

struct AlgorithmResult {
  Algorithm algorithm;
  ConfusionMatrix aggregate;
  std::vector<double> fold_accuracy;
  std::vector<std::size_t> fold_sizes;
};

struct CrossValidationResult {
  int k = 0;
  AccuracyTable table;
  std::vector<AlgorithmResult> algorithms;
  std::vector<std::string> warnings;
};

/// Trains and tests all six algorithms on k folds. Folds are drawn once per
/// feature-set kind from config.seed and shared by both models of that kind.
CrossValidationResult run_cross_validation(const FeatureSets& sets, const TrainConfig& config, int k);

}  // namespace dnsveil
