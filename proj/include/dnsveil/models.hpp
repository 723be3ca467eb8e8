#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "dnsveil/features.hpp"

namespace dnsveil {

/// Hyperparameters for both classifiers. `rf_features_per_split == 0` means
/// floor(sqrt(feature_dim)).
struct TrainConfig {
  int rf_trees = 100;
  int rf_features_per_split = 0;
  int mlp_hidden = 100;
  double mlp_learning_rate = 0.01;
  int mlp_batch = 200;
  int mlp_max_epochs = 200;
  double mlp_plateau_tol = 1e-4;
  int mlp_plateau_patience = 10;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
  int features_per_split(int feature_dim) const;

  bool operator==(const TrainConfig&) const = default;
};

/// Column-major feature matrix (one column per sample) with class indices.
struct Dataset {
  int feature_dim = 0;
  std::vector<double> values;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> sample(std::size_t i) const {
    return {values.data() + i * static_cast<std::size_t>(feature_dim), static_cast<std::size_t>(feature_dim)};
  }

  static Dataset from_rows(const std::vector<FeatureRow>& rows);
  /// Subset in the order given by `indices`.
  Dataset subset(std::span<const std::size_t> indices) const;
};

enum class ModelErrorKind { DegenerateDataset, NonFiniteLoss, DimensionMismatch, EmptyInput, BadModelFile };
using ModelError = KindedError<ModelErrorKind>;

struct Prediction {
  TrafficClass cls = TrafficClass::Normal;
  /// Class probabilities (MLP) or vote fractions (forest).
  std::array<double, kClassCount> scores{};
};

// ---------------------------------------------------------------------------
// Multilayer perceptron

/// Logistic hidden layers and a softmax output layer. Each matrix has one
/// row per unit and one column per input plus a trailing bias column.
struct MlpModel {
  std::vector<Eigen::MatrixXd> layers;
  int feature_dim = 0;
  int class_count = kClassCount;

  /// Logits of the output layer for one sample.
  Eigen::VectorXd logits(std::span<const double> features) const;
};

struct MlpTrainingTrace {
  std::vector<double> epoch_losses;
};

MlpModel train_mlp(const std::vector<FeatureRow>& rows, const TrainConfig& config,
                   MlpTrainingTrace* trace = nullptr);
MlpModel train_mlp(const Dataset& data, const TrainConfig& config, MlpTrainingTrace* trace = nullptr);

/// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] initialization for the given
/// layer widths (input first, classes last).
MlpModel init_mlp(const std::vector<int>& widths, std::uint64_t seed);

Prediction mlp_predict(const MlpModel& model, std::span<const double> features);

/// Mean cross-entropy of a batch and its gradient with respect to every
/// weight, same shapes as `model.layers`.
struct MlpGradient {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> layers;
};
MlpGradient mlp_loss_gradient(const MlpModel& model, const Dataset& batch);

/// Softmax with the max-logit shift.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Argmax with ties broken toward the lowest index.
int argmax_lowest(std::span<const double> scores);

// ---------------------------------------------------------------------------
// Random forest

struct TreeNode {
  /// -1 marks a leaf.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int leaf_class = 0;

  bool operator==(const TreeNode&) const = default;
};

/// Binary CART tree; samples with value <= threshold go left.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  int predict(std::span<const double> features) const;
  int depth() const;

  bool operator==(const DecisionTree&) const = default;
};

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  int feature_dim = 0;
  int class_count = kClassCount;

  bool operator==(const RandomForestModel&) const = default;
};

RandomForestModel train_random_forest(const std::vector<FeatureRow>& rows, const TrainConfig& config);
RandomForestModel train_random_forest(const Dataset& data, const TrainConfig& config);

/// One Gini-CART tree grown without depth limit on `data` as given (no
/// bootstrap), sampling `features_per_split` candidates per node.
DecisionTree grow_tree(const Dataset& data, std::span<const std::size_t> sample, int features_per_split,
                       std::uint64_t seed);

Prediction rf_predict(const RandomForestModel& model, std::span<const double> features);

/// Gini impurity of a class-count vector.
double gini_impurity(std::span<const std::size_t> counts);

}  // namespace dnsveil
