#include "dnsveil/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dnsveil {

using nlohmann::json;

namespace {

[[noreturn]] void bad_model(const std::string& message) {
  throw ModelError(ModelErrorKind::BadModelFile, "BadModelFile", message);
}

json confusion_json(const ConfusionMatrix& cm) {
  json rows = json::array();
  for (const auto& row : cm.counts) rows.push_back(row);
  return rows;
}

json metrics_json(const Metrics& m) {
  json per_class = json::object();
  for (auto cls : kAllClasses) {
    const auto& pc = m.per_class[static_cast<std::size_t>(class_index(cls))];
    per_class[std::string(class_label(cls))] = {{"precision", pc.precision},
                                                {"recall", pc.recall},
                                                {"precision_defined", pc.precision_defined},
                                                {"recall_defined", pc.recall_defined}};
  }
  return per_class;
}

}  // namespace

json RunManifest::to_json() const {
  json j = {{"subcommand", subcommand},
            {"inputs", inputs},
            {"seeds", seeds},
            {"config", config},
            {"tool_version", tool_version}};
  if (wall_clock_seconds) j["wall_clock_seconds"] = *wall_clock_seconds;
  return j;
}

json config_to_json(const TrainConfig& c) {
  return {{"rf_trees", c.rf_trees},
          {"rf_features_per_split", c.rf_features_per_split},
          {"mlp_hidden", c.mlp_hidden},
          {"mlp_learning_rate", c.mlp_learning_rate},
          {"mlp_batch", c.mlp_batch},
          {"mlp_max_epochs", c.mlp_max_epochs},
          {"mlp_plateau_tol", c.mlp_plateau_tol},
          {"mlp_plateau_patience", c.mlp_plateau_patience},
          {"seed", c.seed}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.rf_trees = j.at("rf_trees").get<int>();
  c.rf_features_per_split = j.at("rf_features_per_split").get<int>();
  c.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.mlp_learning_rate = j.at("mlp_learning_rate").get<double>();
  c.mlp_batch = j.at("mlp_batch").get<int>();
  c.mlp_max_epochs = j.at("mlp_max_epochs").get<int>();
  c.mlp_plateau_tol = j.at("mlp_plateau_tol").get<double>();
  c.mlp_plateau_patience = j.at("mlp_plateau_patience").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json evaluation_report(const CrossValidationResult& result, const RunManifest& manifest) {
  json algorithms = json::array();
  for (const auto& ar : result.algorithms) {
    const Metrics m = metrics(ar.aggregate);
    algorithms.push_back({{"algorithm", ar.algorithm.label()},
                          {"model", ar.algorithm.model == ModelKind::Mlp ? "mlp" : "random_forest"},
                          {"feature_set", std::string(kind_label(ar.algorithm.features))},
                          {"accuracy", m.accuracy},
                          {"per_class", metrics_json(m)},
                          {"confusion_matrix", confusion_json(ar.aggregate)},
                          {"fold_accuracy", ar.fold_accuracy},
                          {"fold_sizes", ar.fold_sizes}});
  }
  std::vector<std::string> classes;
  for (auto cls : kAllClasses) classes.emplace_back(class_label(cls));
  return {{"schema_version", kReportSchemaVersion},
          {"report", "evaluation"},
          {"manifest", manifest.to_json()},
          {"folds", result.k},
          {"classes", classes},
          {"accuracy_table", {{"algorithms", result.table.algorithms}, {"accuracy", result.table.accuracy}}},
          {"algorithms", algorithms},
          {"warnings", result.warnings}};
}

json significance_report(const SignificanceReport& r, const RunManifest& manifest) {
  json posthoc = json::array();
  for (const auto& e : r.posthoc) {
    posthoc.push_back({{"algorithm", e.algorithm},
                       {"mean_rank", e.mean_rank},
                       {"z", e.z},
                       {"p", e.p},
                       {"adjusted_threshold", e.threshold},
                       {"reject", e.reject}});
  }
  json mean_ranks = json::object();
  for (std::size_t i = 0; i < r.algorithm_labels.size(); ++i) mean_ranks[r.algorithm_labels[i]] = r.mean_ranks[i];
  return {{"schema_version", kReportSchemaVersion},
          {"report", "significance"},
          {"manifest", manifest.to_json()},
          {"N", r.folds},
          {"k", r.algorithms},
          {"alpha", r.alpha},
          {"mean_ranks", mean_ranks},
          {"chi2_f", r.chi2_f},
          {"f_f", r.f_f ? json(*r.f_f) : json(nullptr)},
          {"f_f_singular", r.f_f_singular},
          {"dof", {r.dof1, r.dof2}},
          {"f_critical", r.f_critical},
          {"friedman_reject", r.friedman_reject},
          {"baseline_algorithm", r.baseline_algorithm},
          {"posthoc_sides", r.posthoc_sides},
          {"posthoc", posthoc}};
}

AccuracyTable accuracy_table_from_report(const json& report) {
  const auto& t = report.at("accuracy_table");
  AccuracyTable table;
  table.algorithms = t.at("algorithms").get<std::vector<std::string>>();
  table.accuracy = t.at("accuracy").get<std::vector<std::vector<double>>>();
  for (const auto& row : table.accuracy) {
    if (row.size() != table.algorithms.size()) throw std::invalid_argument("accuracy table rows do not match labels");
  }
  return table;
}

std::string dump_report(const json& j) { return j.dump(2) + "\n"; }

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed on " + path);
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return json::parse(in);
}

std::string exact_decimal(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_exact_decimal(const std::string& text) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) bad_model("bad number '" + text + "'");
  return value;
}

json model_to_json(const AnyModel& model, const TrainConfig& config) {
  json j = {{"schema_version", kReportSchemaVersion}, {"config", config_to_json(config)}};
  if (const auto* mlp = std::get_if<MlpModel>(&model)) {
    j["model"] = "mlp";
    j["feature_dim"] = mlp->feature_dim;
    j["class_count"] = mlp->class_count;
    j["hidden_activation"] = "logistic";
    j["output"] = "softmax";
    json layers = json::array();
    for (const auto& w : mlp->layers) {
      std::vector<std::string> values;
      values.reserve(static_cast<std::size_t>(w.size()));
      for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) values.push_back(exact_decimal(w(r, c)));
      }
      layers.push_back({{"rows", w.rows()}, {"cols", w.cols()}, {"row_major", values}});
    }
    j["layers"] = layers;
  } else {
    const auto& rf = std::get<RandomForestModel>(model);
    j["model"] = "random_forest";
    j["feature_dim"] = rf.feature_dim;
    j["class_count"] = rf.class_count;
    json trees = json::array();
    for (const auto& tree : rf.trees) {
      json nodes = json::array();
      for (const auto& n : tree.nodes) {
        nodes.push_back({n.feature, exact_decimal(n.threshold), n.left, n.right, n.leaf_class});
      }
      trees.push_back(nodes);
    }
    j["trees"] = trees;
  }
  return j;
}

AnyModel model_from_json(const json& j) {
  try {
    const auto kind = j.at("model").get<std::string>();
    if (kind == "mlp") {
      MlpModel m;
      m.feature_dim = j.at("feature_dim").get<int>();
      m.class_count = j.at("class_count").get<int>();
      for (const auto& layer : j.at("layers")) {
        const auto rows = layer.at("rows").get<Eigen::Index>();
        const auto cols = layer.at("cols").get<Eigen::Index>();
        const auto& values = layer.at("row_major");
        if (static_cast<Eigen::Index>(values.size()) != rows * cols) bad_model("layer size mismatch");
        Eigen::MatrixXd w(rows, cols);
        std::size_t i = 0;
        for (Eigen::Index r = 0; r < rows; ++r) {
          for (Eigen::Index c = 0; c < cols; ++c) w(r, c) = parse_exact_decimal(values[i++].get<std::string>());
        }
        if (!w.allFinite()) bad_model("non-finite weight");
        m.layers.push_back(std::move(w));
      }
      Eigen::Index expected_in = m.feature_dim;
      for (const auto& w : m.layers) {
        if (w.cols() != expected_in + 1) bad_model("layer shapes do not chain");
        expected_in = w.rows();
      }
      if (expected_in != m.class_count) bad_model("output width differs from class count");
      return m;
    }
    if (kind == "random_forest") {
      RandomForestModel m;
      m.feature_dim = j.at("feature_dim").get<int>();
      m.class_count = j.at("class_count").get<int>();
      for (const auto& nodes : j.at("trees")) {
        DecisionTree tree;
        for (const auto& n : nodes) {
          TreeNode node{n.at(0).get<int>(), parse_exact_decimal(n.at(1).get<std::string>()), n.at(2).get<int>(),
                        n.at(3).get<int>(), n.at(4).get<int>()};
          tree.nodes.push_back(node);
        }
        const int count = static_cast<int>(tree.nodes.size());
        for (const auto& node : tree.nodes) {
          const bool leaf = node.feature < 0;
          if (!leaf && (node.feature >= m.feature_dim || node.left <= 0 || node.left >= count || node.right <= 0 ||
                        node.right >= count)) {
            bad_model("tree node out of range");
          }
          if (node.leaf_class < 0 || node.leaf_class >= m.class_count) bad_model("leaf class out of range");
        }
        if (tree.nodes.empty()) bad_model("empty tree");
        m.trees.push_back(std::move(tree));
      }
      if (m.trees.empty()) bad_model("forest has no trees");
      return m;
    }
    bad_model("unknown model kind '" + kind + "'");
  } catch (const json::exception& e) {
    bad_model(e.what());
  }
}

void save_model(const AnyModel& model, const TrainConfig& config, const std::string& path) {
  write_text_file(path, model_to_json(model, config).dump() + "\n");
}

AnyModel load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

Prediction predict(const AnyModel& model, std::span<const double> features) {
  if (const auto* mlp = std::get_if<MlpModel>(&model)) return mlp_predict(*mlp, features);
  return rf_predict(std::get<RandomForestModel>(model), features);
}

}  // namespace dnsveil
