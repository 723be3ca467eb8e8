#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "dnsveil/models.hpp"
#include "dnsveil/rng.hpp"

namespace dnsveil {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct ForwardPass {
  // activations[0] is the input batch; the last entry holds probabilities.
  std::vector<MatrixXd> activations;
};

MatrixXd affine(const MatrixXd& weights, const MatrixXd& input) {
  const auto in = input.rows();
  MatrixXd z = weights.leftCols(in) * input;
  z.colwise() += weights.col(in);
  return z;
}

ForwardPass forward(const MlpModel& model, const MatrixXd& batch) {
  ForwardPass pass;
  pass.activations.reserve(model.layers.size() + 1);
  pass.activations.push_back(batch);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    MatrixXd z = affine(model.layers[l], pass.activations.back());
    if (l + 1 < model.layers.size()) {
      pass.activations.push_back((1.0 + (-z.array()).exp()).inverse().matrix());
    } else {
      // Column-wise softmax with max shift.
      const Eigen::RowVectorXd shift = z.colwise().maxCoeff();
      z.rowwise() -= shift;
      z = z.array().exp().matrix();
      const Eigen::RowVectorXd norm = z.colwise().sum();
      z.array().rowwise() /= norm.array();
      pass.activations.push_back(std::move(z));
    }
  }
  return pass;
}

MatrixXd gather(const Dataset& data, std::span<const std::size_t> indices) {
  MatrixXd batch(data.feature_dim, static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const auto s = data.sample(indices[j]);
    for (int f = 0; f < data.feature_dim; ++f) batch(f, static_cast<Eigen::Index>(j)) = s[static_cast<std::size_t>(f)];
  }
  return batch;
}

/// Mean cross-entropy and gradients for the batch `x` with labels `y`.
MlpGradient backprop(const MlpModel& model, const MatrixXd& x, std::span<const int> y) {
  const ForwardPass pass = forward(model, x);
  const auto batch = static_cast<double>(y.size());
  const MatrixXd& probs = pass.activations.back();

  MlpGradient grad;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const double p = probs(y[j], static_cast<Eigen::Index>(j));
    grad.loss -= std::log(std::max(p, std::numeric_limits<double>::min()));
  }
  grad.loss /= batch;

  MatrixXd delta = probs;
  for (std::size_t j = 0; j < y.size(); ++j) delta(y[j], static_cast<Eigen::Index>(j)) -= 1.0;
  delta /= batch;

  grad.layers.resize(model.layers.size());
  for (std::size_t l = model.layers.size(); l-- > 0;) {
    const MatrixXd& input = pass.activations[l];
    const auto in = input.rows();
    MatrixXd g(model.layers[l].rows(), in + 1);
    g.leftCols(in) = delta * input.transpose();
    g.col(in) = delta.rowwise().sum();
    grad.layers[l] = std::move(g);
    if (l > 0) {
      MatrixXd back = model.layers[l].leftCols(in).transpose() * delta;
      delta = (back.array() * input.array() * (1.0 - input.array())).matrix();
    }
  }
  return grad;
}

}  // namespace

void TrainConfig::validate() const {
  if (rf_trees < 1) throw std::invalid_argument("rf_trees must be positive");
  if (rf_features_per_split < 0) throw std::invalid_argument("rf_features_per_split must be non-negative");
  if (mlp_hidden < 1) throw std::invalid_argument("mlp_hidden must be positive");
  if (!(mlp_learning_rate > 0.0) || !std::isfinite(mlp_learning_rate)) {
    throw std::invalid_argument("mlp_learning_rate must be positive");
  }
  if (mlp_batch < 1) throw std::invalid_argument("mlp_batch must be positive");
  if (mlp_max_epochs < 1) throw std::invalid_argument("mlp_max_epochs must be positive");
  if (!(mlp_plateau_tol > 0.0)) throw std::invalid_argument("mlp_plateau_tol must be positive");
  if (mlp_plateau_patience < 1) throw std::invalid_argument("mlp_plateau_patience must be positive");
}

int TrainConfig::features_per_split(int feature_dim) const {
  const int chosen = rf_features_per_split > 0
                         ? rf_features_per_split
                         : static_cast<int>(std::floor(std::sqrt(static_cast<double>(feature_dim))));
  return std::clamp(chosen, 1, std::max(1, feature_dim));
}

Dataset Dataset::from_rows(const std::vector<FeatureRow>& rows) {
  Dataset data;
  if (rows.empty()) return data;
  data.feature_dim = dnsveil::feature_dim(rows.front().kind);
  data.values.reserve(rows.size() * static_cast<std::size_t>(data.feature_dim));
  data.labels.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.kind != rows.front().kind) {
      throw ModelError(ModelErrorKind::DimensionMismatch, "DimensionMismatch", "rows mix feature-set kinds");
    }
    const auto v = row.values();
    data.values.insert(data.values.end(), v.begin(), v.end());
    data.labels.push_back(class_index(row.label));
  }
  return data;
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_dim = feature_dim;
  out.values.reserve(indices.size() * static_cast<std::size_t>(feature_dim));
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) {
    const auto s = sample(i);
    out.values.insert(out.values.end(), s.begin(), s.end());
    out.labels.push_back(labels[i]);
  }
  return out;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double shift = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - shift).exp().matrix();
  return e / e.sum();
}

int argmax_lowest(std::span<const double> scores) {
  int best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

Eigen::VectorXd MlpModel::logits(std::span<const double> features) const {
  if (static_cast<int>(features.size()) != feature_dim) {
    throw ModelError(ModelErrorKind::DimensionMismatch, "DimensionMismatch",
                     "expected " + std::to_string(feature_dim) + " features, got " + std::to_string(features.size()));
  }
  VectorXd a = Eigen::Map<const VectorXd>(features.data(), static_cast<Eigen::Index>(features.size()));
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto in = a.size();
    VectorXd z = layers[l].leftCols(in) * a + layers[l].col(in);
    if (l + 1 < layers.size()) {
      a = (1.0 + (-z.array()).exp()).inverse().matrix();
    } else {
      return z;
    }
  }
  return a;
}

MlpModel init_mlp(const std::vector<int>& widths, std::uint64_t seed) {
  if (widths.size() < 2) throw std::invalid_argument("an MLP needs input and output widths");
  Rng rng(seed);
  MlpModel model;
  model.feature_dim = widths.front();
  model.class_count = widths.back();
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
    MatrixXd w(widths[l + 1], widths[l] + 1);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
    }
    model.layers.push_back(std::move(w));
  }
  return model;
}

MlpGradient mlp_loss_gradient(const MlpModel& model, const Dataset& batch) {
  std::vector<std::size_t> all(batch.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return backprop(model, gather(batch, all), batch.labels);
}

Prediction mlp_predict(const MlpModel& model, std::span<const double> features) {
  const VectorXd probs = softmax(model.logits(features));
  Prediction out;
  for (int c = 0; c < kClassCount && c < probs.size(); ++c) out.scores[static_cast<std::size_t>(c)] = probs(c);
  out.cls = static_cast<TrafficClass>(argmax_lowest(out.scores));
  return out;
}

MlpModel train_mlp(const std::vector<FeatureRow>& rows, const TrainConfig& config, MlpTrainingTrace* trace) {
  return train_mlp(Dataset::from_rows(rows), config, trace);
}

MlpModel train_mlp(const Dataset& data, const TrainConfig& config, MlpTrainingTrace* trace) {
  config.validate();
  const std::set<int> classes(data.labels.begin(), data.labels.end());
  if (classes.size() < 2) {
    throw ModelError(ModelErrorKind::DegenerateDataset, "DegenerateDataset",
                     "training data must contain at least two classes");
  }

  MlpModel model = init_mlp({data.feature_dim, config.mlp_hidden, kClassCount}, config.seed);
  Rng rng(mix_seed(config.seed, 1));
  const std::size_t n = data.size();
  const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(config.mlp_batch), n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<int> batch_labels;

  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < config.mlp_max_epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t stop = std::min(n, start + batch);
      const std::span<const std::size_t> idx(order.data() + start, stop - start);
      batch_labels.clear();
      for (std::size_t i : idx) batch_labels.push_back(data.labels[i]);
      const MlpGradient grad = backprop(model, gather(data, idx), batch_labels);
      if (!std::isfinite(grad.loss)) {
        throw ModelError(ModelErrorKind::NonFiniteLoss, "NonFiniteLoss",
                         "training loss diverged at epoch " + std::to_string(epoch) +
                             "; lower the learning rate");
      }
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        model.layers[l] -= config.mlp_learning_rate * grad.layers[l];
      }
      epoch_loss += grad.loss * static_cast<double>(idx.size());
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss) || !model.layers.back().allFinite()) {
      throw ModelError(ModelErrorKind::NonFiniteLoss, "NonFiniteLoss", "weights became non-finite");
    }
    if (trace) trace->epoch_losses.push_back(epoch_loss);
    stale = (best - epoch_loss < config.mlp_plateau_tol) ? stale + 1 : 0;
    best = std::min(best, epoch_loss);
    if (stale >= config.mlp_plateau_patience) break;
  }
  return model;
}

}  // namespace dnsveil
