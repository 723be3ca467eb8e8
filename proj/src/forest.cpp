#include <algorithm>
#include <numeric>

#include "dnsveil/models.hpp"
#include "dnsveil/parallel.hpp"
#include "dnsveil/rng.hpp"

namespace dnsveil {

namespace {

using Counts = std::array<std::size_t, kClassCount>;

int majority(const Counts& counts) {
  int best = 0;
  for (int c = 1; c < kClassCount; ++c) {
    if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = c;
  }
  return best;
}

/// Sum of squared class counts over size; larger means purer. Weighted child
/// Gini is 1 - (score_left + score_right) / n, so maximizing the score sum
/// minimizes the weighted impurity.
double purity_score(const Counts& counts, std::size_t n) {
  double s = 0.0;
  for (std::size_t c : counts) s += static_cast<double>(c) * static_cast<double>(c);
  return s / static_cast<double>(n);
}

struct Frame {
  std::size_t lo;
  std::size_t hi;
  int node;
};

class TreeGrower {
 public:
  TreeGrower(const Dataset& data, std::span<const std::size_t> sample, int features_per_split, std::uint64_t seed)
      : data_(data), sample_(sample.begin(), sample.end()), mtry_(features_per_split), rng_(seed),
        dim_(data.feature_dim) {
    const std::size_t n = sample_.size();
    order_.resize(static_cast<std::size_t>(dim_));
    for (int f = 0; f < dim_; ++f) {
      auto& ord = order_[static_cast<std::size_t>(f)];
      ord.resize(n);
      std::iota(ord.begin(), ord.end(), std::size_t{0});
      std::stable_sort(ord.begin(), ord.end(),
                       [&](std::size_t a, std::size_t b) { return value(a, f) < value(b, f); });
    }
    goes_left_.assign(n, 0);
    scratch_.resize(n);
  }

  DecisionTree grow() {
    DecisionTree tree;
    tree.nodes.push_back({});
    if (sample_.empty()) return tree;
    std::vector<Frame> stack{{0, sample_.size(), 0}};
    std::vector<int> features(static_cast<std::size_t>(dim_));
    while (!stack.empty()) {
      const Frame frame = stack.back();
      stack.pop_back();
      const auto& first = order_[0];
      Counts counts{};
      for (std::size_t i = frame.lo; i < frame.hi; ++i) ++counts[static_cast<std::size_t>(label(first[i]))];
      const std::size_t n = frame.hi - frame.lo;
      tree.nodes[static_cast<std::size_t>(frame.node)].leaf_class = majority(counts);
      const bool pure = std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }) <= 1;
      if (pure || n < 2) continue;

      std::iota(features.begin(), features.end(), 0);
      rng_.shuffle(features);
      int visited = 0;
      int best_feature = -1;
      std::size_t best_cut = 0;
      double best_score = -1.0;
      for (int f : features) {
        if (visited >= mtry_) break;
        const auto& ord = order_[static_cast<std::size_t>(f)];
        if (value(ord[frame.lo], f) == value(ord[frame.hi - 1], f)) continue;  // constant here
        ++visited;
        Counts left{};
        Counts right = counts;
        for (std::size_t i = frame.lo; i + 1 < frame.hi; ++i) {
          const auto c = static_cast<std::size_t>(label(ord[i]));
          ++left[c];
          --right[c];
          if (value(ord[i], f) == value(ord[i + 1], f)) continue;
          const std::size_t nl = i + 1 - frame.lo;
          const double score = purity_score(left, nl) + purity_score(right, n - nl);
          if (score > best_score) {
            best_score = score;
            best_feature = f;
            best_cut = i;
          }
        }
      }
      if (best_feature < 0) continue;  // every feature constant in this node

      const auto& ord = order_[static_cast<std::size_t>(best_feature)];
      const double lo_v = value(ord[best_cut], best_feature);
      const double hi_v = value(ord[best_cut + 1], best_feature);
      double threshold = lo_v + (hi_v - lo_v) / 2.0;
      if (!(threshold < hi_v)) threshold = lo_v;

      for (std::size_t i = frame.lo; i < frame.hi; ++i) goes_left_[ord[i]] = (i <= best_cut) ? 1 : 0;
      const std::size_t mid = best_cut + 1;
      for (auto& per_feature : order_) partition(per_feature, frame.lo, frame.hi);

      const int left_id = static_cast<int>(tree.nodes.size());
      tree.nodes.push_back({});
      tree.nodes.push_back({});
      auto& node = tree.nodes[static_cast<std::size_t>(frame.node)];
      node.feature = best_feature;
      node.threshold = threshold;
      node.left = left_id;
      node.right = left_id + 1;
      stack.push_back({mid, frame.hi, left_id + 1});
      stack.push_back({frame.lo, mid, left_id});
    }
    return tree;
  }

 private:
  double value(std::size_t pos, int f) const {
    return data_.values[sample_[pos] * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(f)];
  }
  int label(std::size_t pos) const { return data_.labels[sample_[pos]]; }

  /// Stable partition of ord[lo, hi) by goes_left_, keeping sorted order.
  void partition(std::vector<std::size_t>& ord, std::size_t lo, std::size_t hi) {
    std::size_t w = lo;
    std::size_t r = 0;
    for (std::size_t i = lo; i < hi; ++i) {
      if (goes_left_[ord[i]]) {
        ord[w++] = ord[i];
      } else {
        scratch_[r++] = ord[i];
      }
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(r),
              ord.begin() + static_cast<std::ptrdiff_t>(w));
  }

  const Dataset& data_;
  std::vector<std::size_t> sample_;
  int mtry_;
  Rng rng_;
  int dim_;
  std::vector<std::vector<std::size_t>> order_;
  std::vector<char> goes_left_;
  std::vector<std::size_t> scratch_;
};

}  // namespace

double gini_impurity(std::span<const std::size_t> counts) {
  const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  if (n == 0.0) return 0.0;
  double g = 1.0;
  for (std::size_t c : counts) g -= (static_cast<double>(c) / n) * (static_cast<double>(c) / n);
  return g;
}

int DecisionTree::predict(std::span<const double> features) const {
  int id = 0;
  while (nodes[static_cast<std::size_t>(id)].feature >= 0) {
    const auto& node = nodes[static_cast<std::size_t>(id)];
    id = features[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(id)].leaf_class;
}

int DecisionTree::depth() const {
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes[i].feature >= 0) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

DecisionTree grow_tree(const Dataset& data, std::span<const std::size_t> sample, int features_per_split,
                       std::uint64_t seed) {
  return TreeGrower(data, sample, std::max(1, features_per_split), seed).grow();
}

RandomForestModel train_random_forest(const std::vector<FeatureRow>& rows, const TrainConfig& config) {
  return train_random_forest(Dataset::from_rows(rows), config);
}

RandomForestModel train_random_forest(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (data.size() == 0) throw ModelError(ModelErrorKind::EmptyInput, "EmptyInput", "no training rows");
  RandomForestModel model;
  model.feature_dim = data.feature_dim;
  model.trees.resize(static_cast<std::size_t>(config.rf_trees));
  const int mtry = config.features_per_split(data.feature_dim);
  const std::size_t n = data.size();
  parallel_for(model.trees.size(), [&](std::size_t t) {
    Rng rng(mix_seed(config.seed, t));
    std::vector<std::size_t> bootstrap(n);
    for (auto& i : bootstrap) i = rng.below(n);
    model.trees[t] = grow_tree(data, bootstrap, mtry, rng.next_u64());
  });
  return model;
}

Prediction rf_predict(const RandomForestModel& model, std::span<const double> features) {
  if (static_cast<int>(features.size()) != model.feature_dim) {
    throw ModelError(ModelErrorKind::DimensionMismatch, "DimensionMismatch",
                     "expected " + std::to_string(model.feature_dim) + " features, got " +
                         std::to_string(features.size()));
  }
  Prediction out;
  for (const auto& tree : model.trees) out.scores[static_cast<std::size_t>(tree.predict(features))] += 1.0;
  const double total = static_cast<double>(model.trees.size());
  for (auto& s : out.scores) s /= total;
  out.cls = static_cast<TrafficClass>(argmax_lowest(out.scores));
  return out;
}

}  // namespace dnsveil
