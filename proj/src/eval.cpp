#include "dnsveil/eval.hpp"

#include <algorithm>

#include "dnsveil/parallel.hpp"
#include "dnsveil/rng.hpp"

namespace dnsveil {

std::vector<std::size_t> FoldAssignment::rows_in(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
    if (fold_of_row[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::rows_outside(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
    if (fold_of_row[i] != fold) out.push_back(i);
  }
  return out;
}

FoldAssignment stratified_kfold(std::span<const TrafficClass> labels, int k, std::uint64_t seed) {
  if (k < 2) throw EvalError(EvalErrorKind::BadFoldCount, "BadFoldCount", "k must be at least 2");
  if (labels.size() < static_cast<std::size_t>(k)) {
    throw EvalError(EvalErrorKind::TooFewRows, "TooFewRows",
                    std::to_string(labels.size()) + " rows cannot fill " + std::to_string(k) + " folds");
  }
  FoldAssignment out;
  out.k = k;
  out.fold_of_row.assign(labels.size(), 0);
  Rng rng(seed);
  std::size_t dealt = 0;
  for (auto cls : kAllClasses) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    if (members.empty()) continue;
    if (members.size() < static_cast<std::size_t>(k)) {
      out.warnings.push_back("class " + std::string(class_label(cls)) + " has " + std::to_string(members.size()) +
                             " rows, fewer than " + std::to_string(k) + " folds");
    }
    rng.shuffle(members);
    for (std::size_t i : members) out.fold_of_row[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(k));
  }
  return out;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (const auto& row : counts) {
    for (auto c : row) t += c;
  }
  return t;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  for (int t = 0; t < kClassCount; ++t) {
    for (int p = 0; p < kClassCount; ++p) counts[t][p] += other.counts[t][p];
  }
  return *this;
}

ConfusionMatrix confusion_matrix(std::span<const TrafficClass> truth, std::span<const TrafficClass> predicted) {
  if (truth.size() != predicted.size()) {
    throw EvalError(EvalErrorKind::LengthMismatch, "LengthMismatch",
                    std::to_string(truth.size()) + " labels vs " + std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) ++cm.counts[class_index(truth[i])][class_index(predicted[i])];
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw EvalError(EvalErrorKind::EmptyMatrix, "EmptyMatrix", "confusion matrix is empty");
  Metrics m;
  std::uint64_t trace = 0;
  for (int c = 0; c < kClassCount; ++c) {
    trace += cm.counts[c][c];
    std::uint64_t row = 0;
    std::uint64_t col = 0;
    for (int o = 0; o < kClassCount; ++o) {
      row += cm.counts[c][o];
      col += cm.counts[o][c];
    }
    auto& pc = m.per_class[static_cast<std::size_t>(c)];
    pc.precision_defined = col > 0;
    pc.recall_defined = row > 0;
    pc.precision = col > 0 ? static_cast<double>(cm.counts[c][c]) / static_cast<double>(col) : 0.0;
    pc.recall = row > 0 ? static_cast<double>(cm.counts[c][c]) / static_cast<double>(row) : 0.0;
  }
  m.accuracy = static_cast<double>(trace) / static_cast<double>(total);
  return m;
}

std::string Algorithm::label() const {
  return std::string(model == ModelKind::Mlp ? "mlp-" : "rf-") + std::string(kind_label(features));
}

std::vector<Algorithm> standard_algorithms() {
  std::vector<Algorithm> out;
  for (auto model : {ModelKind::Mlp, ModelKind::RandomForest}) {
    for (auto kind : kAllKinds) out.push_back({model, kind});
  }
  return out;
}

const std::vector<FeatureRow>& FeatureSets::of(FeatureSetKind kind) const {
  switch (kind) {
    case FeatureSetKind::Query: return query;
    case FeatureSetKind::Full: return full;
    case FeatureSetKind::Response: return response;
  }
  return query;
}

namespace {

struct FoldOutcome {
  ConfusionMatrix mlp;
  ConfusionMatrix rf;
  std::size_t size = 0;
};

FoldOutcome evaluate_fold(const Dataset& data, const FoldAssignment& folds, int fold, const TrainConfig& config,
                          FeatureSetKind kind) {
  const auto train_idx = folds.rows_outside(fold);
  const auto test_idx = folds.rows_in(fold);
  const Dataset train = data.subset(train_idx);

  TrainConfig fold_config = config;
  fold_config.seed = mix_seed(config.seed, 1000 * static_cast<std::uint64_t>(kind) + static_cast<std::uint64_t>(fold));
  const MlpModel mlp = train_mlp(train, fold_config);
  const RandomForestModel rf = train_random_forest(train, fold_config);

  FoldOutcome out;
  out.size = test_idx.size();
  for (std::size_t i : test_idx) {
    const auto x = data.sample(i);
    const int truth = data.labels[i];
    ++out.mlp.counts[truth][class_index(mlp_predict(mlp, x).cls)];
    ++out.rf.counts[truth][class_index(rf_predict(rf, x).cls)];
  }
  return out;
}

}  // namespace

CrossValidationResult run_cross_validation(const FeatureSets& sets, const TrainConfig& config, int k) {
  config.validate();
  CrossValidationResult result;
  result.k = k;

  struct KindData {
    Dataset data;
    FoldAssignment folds;
  };
  std::vector<KindData> kinds;
  for (auto kind : kAllKinds) {
    const auto& rows = sets.of(kind);
    std::vector<TrafficClass> labels;
    labels.reserve(rows.size());
    for (const auto& r : rows) labels.push_back(r.label);
    KindData kd{Dataset::from_rows(rows), stratified_kfold(labels, k, config.seed)};
    for (const auto& w : kd.folds.warnings) result.warnings.push_back(std::string(kind_label(kind)) + ": " + w);
    kinds.push_back(std::move(kd));
  }

  const std::size_t tasks = kAllKinds.size() * static_cast<std::size_t>(k);
  std::vector<FoldOutcome> outcomes(tasks);
  parallel_for(tasks, [&](std::size_t t) {
    const std::size_t kind_pos = t / static_cast<std::size_t>(k);
    const int fold = static_cast<int>(t % static_cast<std::size_t>(k));
    outcomes[t] = evaluate_fold(kinds[kind_pos].data, kinds[kind_pos].folds, fold, config, kAllKinds[kind_pos]);
  });

  const auto algorithms = standard_algorithms();
  result.table.accuracy.assign(static_cast<std::size_t>(k), std::vector<double>(algorithms.size(), 0.0));
  for (std::size_t a = 0; a < algorithms.size(); ++a) {
    AlgorithmResult ar;
    ar.algorithm = algorithms[a];
    result.table.algorithms.push_back(algorithms[a].label());
    const auto kind_pos = static_cast<std::size_t>(std::find(kAllKinds.begin(), kAllKinds.end(),
                                                             algorithms[a].features) - kAllKinds.begin());
    for (int fold = 0; fold < k; ++fold) {
      const auto& outcome = outcomes[kind_pos * static_cast<std::size_t>(k) + static_cast<std::size_t>(fold)];
      const ConfusionMatrix& cm = algorithms[a].model == ModelKind::Mlp ? outcome.mlp : outcome.rf;
      ar.aggregate += cm;
      const double acc = metrics(cm).accuracy;
      ar.fold_accuracy.push_back(acc);
      ar.fold_sizes.push_back(outcome.size);
      result.table.accuracy[static_cast<std::size_t>(fold)][a] = acc;
    }
    result.algorithms.push_back(std::move(ar));
  }
  return result;
}

}  // namespace dnsveil
