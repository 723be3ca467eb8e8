#include "dnsveil/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "dnsveil/eval.hpp"
#include "dnsveil/pairing.hpp"
#include "dnsveil/report.hpp"
#include "dnsveil/rng.hpp"
#include "dnsveil/stats.hpp"
#include "dnsveil/synth.hpp"

namespace fs = std::filesystem;

namespace dnsveil {

namespace {

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

const std::vector<std::string> kClassNames = {"normal", "ssh", "sftp", "telnet"};
const std::vector<std::string> kKindNames = {"query", "full", "response"};

TrafficClass class_from_flag(const std::string& s) {
  const auto cls = parse_class_label(s);
  if (!cls) throw UsageError("unknown class '" + s + "'");
  return *cls;
}

FeatureSetKind kind_from_flag(const std::string& s) {
  const auto kind = parse_kind_label(s);
  if (!kind) throw UsageError("unknown feature set '" + s + "'");
  return *kind;
}

void add_train_options(CLI::App* cmd, TrainConfig& c) {
  cmd->add_option("--rf-trees", c.rf_trees, "Trees per forest")->capture_default_str();
  cmd->add_option("--rf-mtry", c.rf_features_per_split, "Features tried per split (0 = floor(sqrt(d)))")
      ->capture_default_str();
  cmd->add_option("--mlp-hidden", c.mlp_hidden, "Hidden units")->capture_default_str();
  cmd->add_option("--mlp-lr", c.mlp_learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--mlp-batch", c.mlp_batch, "Mini-batch size")->capture_default_str();
  cmd->add_option("--mlp-epochs", c.mlp_max_epochs, "Maximum epochs")->capture_default_str();
  cmd->add_option("--mlp-tol", c.mlp_plateau_tol, "Plateau tolerance")->capture_default_str();
  cmd->add_option("--mlp-patience", c.mlp_plateau_patience, "Plateau patience in epochs")->capture_default_str();
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string cls;
  int pairs = 1000;
  std::uint64_t seed = 1;
  std::string out;
  double loss = 0.02;
  std::string domain = "dnshax.se";
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  SynthConfig config;
  config.cls = class_from_flag(a.cls);
  config.pair_count = a.pairs;
  config.seed = a.seed;
  config.response_loss_rate = a.loss;
  config.tunnel_domain = a.domain;
  config.validate();
  const auto pairs = generate_pairs(config);
  write_pcap(pairs, a.out);
  const auto answered = std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.response.has_value(); });
  out << "wrote " << pairs.size() + static_cast<std::size_t>(answered) << " frames (" << pairs.size() << " queries, "
      << answered << " responses) to " << a.out << "\n";
  return kExitOk;
}

struct ExtractArgs {
  std::vector<std::string> inputs;
  std::string label;
  std::string out_dir;
  std::string client_net;
  std::int64_t window_micros = kDefaultPairWindowMicros;
};

void print_extract_summary(const ExtractSummary& s, std::ostream& out) {
  out << "frames: " << s.frames << "\n"
      << "dns records: " << s.dns_records << "\n"
      << "skipped: " << s.skipped.total() << " (not ipv4 " << s.skipped.not_ipv4 << ", not udp " << s.skipped.not_udp
      << ", fragmented " << s.skipped.fragmented << ", not dns port " << s.skipped.not_dns_port << ", malformed "
      << s.skipped.malformed << ", filtered " << s.skipped.filtered << ")\n"
      << "pairs: " << s.pairs << " (orphan responses " << s.orphan_responses << ")\n"
      << "rows: query " << s.rows[0] << ", full " << s.rows[1] << ", response " << s.rows[2] << "\n"
      << "input bytes: " << s.input_bytes << "\n"
      << "output bytes: " << s.output_bytes << "\n"
      << "reduction: " << fixed(s.reduction_percent(), 1) << "%\n";
}

int cmd_extract(const ExtractArgs& a, std::ostream& out) {
  if (a.window_micros <= 0) throw UsageError("--window-us must be positive");
  const auto summary = extract_features(a.inputs, class_from_flag(a.label), a.out_dir, a.client_net, a.window_micros);
  print_extract_summary(summary, out);
  return kExitOk;
}

struct EvaluateArgs {
  std::string features_dir;
  int folds = 20;
  std::uint64_t seed = 1;
  std::string out;
  bool record_timing = false;
  TrainConfig train;
};

FeatureSets load_feature_sets(const fs::path& dir) {
  FeatureSets sets;
  sets.query = read_feature_file((dir / feature_file_name(FeatureSetKind::Query)).string(), FeatureSetKind::Query).rows;
  sets.full = read_feature_file((dir / feature_file_name(FeatureSetKind::Full)).string(), FeatureSetKind::Full).rows;
  sets.response =
      read_feature_file((dir / feature_file_name(FeatureSetKind::Response)).string(), FeatureSetKind::Response).rows;
  return sets;
}

void print_evaluation_summary(const CrossValidationResult& r, std::ostream& out) {
  out << "folds: " << r.k << "\n";
  out << std::left << std::setw(14) << "algorithm" << std::setw(10) << "accuracy" << std::setw(14) << "normal prec"
      << "normal rec\n";
  for (const auto& ar : r.algorithms) {
    const auto m = metrics(ar.aggregate);
    const auto& n = m.per_class[0];
    out << std::setw(14) << ar.algorithm.label() << std::setw(10) << fixed(m.accuracy, 4) << std::setw(14)
        << fixed(n.precision, 4) << fixed(n.recall, 4) << "\n";
  }
  out << std::right;
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
}

nlohmann::json evaluate_config_echo(const EvaluateArgs& a) {
  TrainConfig train = a.train;
  train.seed = a.seed;
  auto config = config_to_json(train);
  config["folds"] = a.folds;
  return config;
}

nlohmann::json run_evaluation(const EvaluateArgs& a, const std::vector<std::string>& manifest_inputs,
                              std::ostream& out) {
  Stopwatch clock;
  if (a.folds < 2) throw UsageError("--folds must be at least 2");
  const auto sets = load_feature_sets(a.features_dir);
  TrainConfig train = a.train;
  train.seed = a.seed;
  const auto result = run_cross_validation(sets, train, a.folds);

  RunManifest manifest;
  manifest.subcommand = "evaluate";
  manifest.inputs = manifest_inputs;
  manifest.seeds = {a.seed};
  manifest.config = evaluate_config_echo(a);
  if (a.record_timing) manifest.wall_clock_seconds = clock.seconds();
  print_evaluation_summary(result, out);
  return evaluation_report(result, manifest);
}

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  std::vector<std::string> inputs;
  for (auto kind : kAllKinds) inputs.push_back((fs::path(a.features_dir) / feature_file_name(kind)).string());
  const auto report = run_evaluation(a, inputs, out);
  write_text_file(a.out, dump_report(report));
  out << "report: " << a.out << "\n";
  return kExitOk;
}

struct SignificanceArgs {
  std::string eval;
  std::string baseline = "mlp-query";
  double alpha = 0.05;
  std::string out;
  bool record_timing = false;
};

void print_significance_summary(const SignificanceReport& r, std::ostream& out) {
  out << "N = " << r.folds << ", k = " << r.algorithms << "\n";
  out << "chi2_F = " << fixed(r.chi2_f, 4) << "\n";
  if (r.f_f) {
    out << "F_F = " << fixed(*r.f_f, 4);
  } else {
    out << "F_F = undefined (identical ranking in every fold)";
  }
  out << ", F(" << r.dof1 << ", " << r.dof2 << ") critical = " << fixed(r.f_critical, 4) << "\n";
  out << "friedman: " << (r.friedman_reject ? "reject" : "retain") << " H0 at alpha " << r.alpha << "\n";
  for (const auto& e : r.posthoc) {
    out << "  " << std::left << std::setw(14) << e.algorithm << std::right << " z " << fixed(e.z, 4) << "  p "
        << std::setprecision(4) << std::scientific << e.p << "  threshold " << e.threshold << std::defaultfloat
        << "  " << (e.reject ? "differs from " : "same as ") << r.baseline_algorithm << "\n";
  }
}

nlohmann::json run_significance_report(const SignificanceArgs& a, const std::string& manifest_input,
                                       std::ostream& out) {
  Stopwatch clock;
  if (!(a.alpha > 0.0 && a.alpha < 1.0)) throw UsageError("--alpha must lie in (0, 1)");
  const auto eval = read_json_file(a.eval);
  AccuracyTable table;
  try {
    table = accuracy_table_from_report(eval);
  } catch (const std::invalid_argument& e) {
    throw FeatureFileError(FeatureFileErrorKind::MalformedRow, "MalformedReport", e.what());
  }
  const auto sig = run_significance(table, a.baseline, a.alpha);

  RunManifest manifest;
  manifest.subcommand = "significance";
  manifest.inputs = {manifest_input};
  manifest.config = {{"baseline", a.baseline}, {"alpha", a.alpha}};
  if (a.record_timing) manifest.wall_clock_seconds = clock.seconds();
  print_significance_summary(sig, out);
  return significance_report(sig, manifest);
}

int cmd_significance(const SignificanceArgs& a, std::ostream& out) {
  if (a.out.empty()) {
    std::ostringstream discard;
    out << dump_report(run_significance_report(a, a.eval, discard));
    return kExitOk;
  }
  write_text_file(a.out, dump_report(run_significance_report(a, a.eval, out)));
  out << "report: " << a.out << "\n";
  return kExitOk;
}

struct ExperimentArgs {
  std::string out_dir;
  std::uint64_t seed = 1;
  int pairs = 5000;
  double loss = 0.02;
  int folds = 20;
  std::string baseline = "mlp-query";
  double alpha = 0.05;
  bool record_timing = false;
  TrainConfig train;
};

int cmd_run_experiment(const ExperimentArgs& a, std::ostream& out) {
  Stopwatch clock;
  const fs::path root(a.out_dir);
  const fs::path pcap_dir = root / "pcap";
  const fs::path features_dir = root / "features";
  fs::create_directories(pcap_dir);
  fs::create_directories(features_dir);
  // Extraction appends, so stale rows from an earlier run must go first.
  for (auto kind : kAllKinds) fs::remove(features_dir / feature_file_name(kind));

  for (auto cls : kAllClasses) {
    const std::string label(class_label(cls));
    SynthArgs s;
    s.cls = label;
    s.pairs = a.pairs;
    s.seed = mix_seed(a.seed, static_cast<std::uint64_t>(class_index(cls)));
    s.loss = a.loss;
    s.out = (pcap_dir / (label + ".pcap")).string();
    out << "[synth " << label << "] ";
    cmd_synth(s, out);
  }
  for (auto cls : kAllClasses) {
    const std::string label(class_label(cls));
    out << "[extract " << label << "]\n";
    print_extract_summary(
        extract_features({(pcap_dir / (label + ".pcap")).string()}, cls, features_dir.string()), out);
  }

  EvaluateArgs e;
  e.features_dir = features_dir.string();
  e.folds = a.folds;
  e.seed = a.seed;
  e.record_timing = a.record_timing;
  e.train = a.train;
  std::vector<std::string> feature_inputs;
  for (auto kind : kAllKinds) feature_inputs.push_back("features/" + feature_file_name(kind));
  out << "[evaluate]\n";
  auto eval_report = run_evaluation(e, feature_inputs, out);
  eval_report["manifest"]["subcommand"] = "run-experiment";
  eval_report["manifest"]["seeds"] = {a.seed};
  eval_report["manifest"]["config"]["pairs_per_class"] = a.pairs;
  eval_report["manifest"]["config"]["response_loss_rate"] = a.loss;
  const auto eval_path = root / "evaluation.json";
  write_text_file(eval_path.string(), dump_report(eval_report));

  SignificanceArgs g;
  g.eval = eval_path.string();
  g.baseline = a.baseline;
  g.alpha = a.alpha;
  g.record_timing = a.record_timing;
  out << "[significance]\n";
  auto sig_report = run_significance_report(g, "evaluation.json", out);
  sig_report["manifest"]["subcommand"] = "run-experiment";
  sig_report["manifest"]["seeds"] = {a.seed};
  write_text_file((root / "significance.json").string(), dump_report(sig_report));

  out << "reports: " << eval_path.string() << ", " << (root / "significance.json").string() << "\n";
  if (a.record_timing) out << "wall clock: " << fixed(clock.seconds(), 1) << " s\n";
  return kExitOk;
}

struct TrainArgs {
  std::string features;
  std::string kind = "full";
  std::string model = "rf";
  std::uint64_t seed = 1;
  std::string out;
  TrainConfig train;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const auto kind = kind_from_flag(a.kind);
  const auto file = read_feature_file(a.features, kind);
  TrainConfig config = a.train;
  config.seed = a.seed;
  AnyModel model;
  if (a.model == "mlp") {
    model = train_mlp(file.rows, config);
  } else {
    model = train_random_forest(file.rows, config);
  }
  save_model(model, config, a.out);
  std::size_t correct = 0;
  for (const auto& row : file.rows) {
    const auto v = row.values();
    correct += predict(model, v).cls == row.label ? 1U : 0U;
  }
  out << "trained " << a.model << " on " << file.rows.size() << " " << a.kind << " rows; training accuracy "
      << fixed(file.rows.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(file.rows.size()), 4)
      << "\nmodel: " << a.out << "\n";
  return kExitOk;
}

struct PredictArgs {
  std::string model;
  std::string features;
  std::string kind = "full";
  std::string out;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
  const auto model = load_model(a.model);
  const auto file = read_feature_file(a.features, kind_from_flag(a.kind));
  std::ostringstream csv;
  csv << "predicted,label\n";
  std::vector<TrafficClass> truth;
  std::vector<TrafficClass> predicted;
  for (const auto& row : file.rows) {
    const auto v = row.values();
    const auto p = predict(model, v).cls;
    csv << class_label(p) << "," << class_label(row.label) << "\n";
    truth.push_back(row.label);
    predicted.push_back(p);
  }
  if (a.out.empty()) {
    out << csv.str();
    return kExitOk;
  }
  write_text_file(a.out, csv.str());
  if (!truth.empty()) out << "accuracy " << fixed(metrics(confusion_matrix(truth, predicted)).accuracy, 4) << "\n";
  out << "predictions: " << a.out << "\n";
  return kExitOk;
}

int exit_code_for(const Error& e) {
  if (const auto* m = dynamic_cast<const ModelError*>(&e)) {
    switch (m->kind()) {
      case ModelErrorKind::BadModelFile:
      case ModelErrorKind::DimensionMismatch:
        return kExitParse;
      default:
        return kExitDegenerate;
    }
  }
  if (const auto* v = dynamic_cast<const EvalError*>(&e)) {
    return v->kind() == EvalErrorKind::BadFoldCount ? kExitUsage : kExitDegenerate;
  }
  if (const auto* s = dynamic_cast<const StatsError*>(&e)) {
    switch (s->kind()) {
      case StatsErrorKind::UnknownBaseline:
        return kExitBadReference;
      case StatsErrorKind::BadArgument:
        return kExitUsage;
      default:
        return kExitDegenerate;
    }
  }
  if (const auto* p = dynamic_cast<const PairingError*>(&e)) {
    return p->kind() == PairingErrorKind::BadWindow ? kExitUsage : kExitParse;
  }
  return kExitParse;
}

}  // namespace

double ExtractSummary::reduction_percent() const {
  if (input_bytes == 0) return 0.0;
  return (1.0 - static_cast<double>(output_bytes) / static_cast<double>(input_bytes)) * 100.0;
}

ExtractSummary extract_features(const std::vector<std::string>& inputs, TrafficClass label,
                                const std::string& out_dir, const std::string& client_net,
                                std::int64_t window_micros) {
  ExtractSummary s;
  std::optional<Ipv4Network> net;
  if (!client_net.empty()) net = Ipv4Network::parse(client_net);

  std::vector<DnsPacketRecord> records;
  for (const auto& path : inputs) {
    PcapReader reader(path);
    std::error_code ec;
    const auto size = fs::file_size(path, ec);
    if (ec) throw CaptureError(CaptureErrorKind::IoError, "IoError", "cannot stat " + path);
    s.input_bytes += size;
    while (auto frame = reader.next()) {
      ++s.frames;
      auto record = extract_dns_records(*frame, &s.skipped);
      if (!record) continue;
      if (net && !net->contains(record->client_addr)) {
        ++s.skipped.filtered;
        continue;
      }
      records.push_back(std::move(*record));
    }
  }
  // Several captures may interleave in time; pairing wants one ordered stream.
  std::stable_sort(records.begin(), records.end(),
                   [](const DnsPacketRecord& a, const DnsPacketRecord& b) { return a.timestamp_micros < b.timestamp_micros; });
  s.dns_records = records.size();
  const auto paired = pair_streams(records, window_micros);
  s.pairs = paired.pairs.size();
  s.orphan_responses = paired.orphan_responses.size();

  fs::create_directories(out_dir);
  for (std::size_t i = 0; i < kAllKinds.size(); ++i) {
    const auto kind = kAllKinds[i];
    const auto rows = make_feature_rows(paired.pairs, paired.orphan_responses, kind, label);
    s.rows[i] = rows.size();
    s.output_bytes += append_feature_file(rows, kind, (fs::path(out_dir) / feature_file_name(kind)).string());
  }
  return s;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Classify DNS tunnel traffic from packet captures", "dnsveil"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", kToolVersion);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic pcap");
  synth_cmd->add_option("--class", synth.cls, "Traffic class")->required()->check(CLI::IsMember(kClassNames));
  synth_cmd->add_option("--pairs", synth.pairs, "Number of queries")->capture_default_str()->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--out", synth.out, "Output pcap")->required();
  synth_cmd->add_option("--loss", synth.loss, "Fraction of unanswered queries")->capture_default_str();
  synth_cmd->add_option("--domain", synth.domain, "Tunnel domain")->capture_default_str();

  ExtractArgs extract;
  auto* extract_cmd = app.add_subcommand("extract", "Append feature rows from pcaps to query/full/response CSVs");
  extract_cmd->add_option("--in", extract.inputs, "Input pcaps")->required()->expected(1, -1);
  extract_cmd->add_option("--label", extract.label, "Class of every input")->required()->check(CLI::IsMember(kClassNames));
  extract_cmd->add_option("--out-dir", extract.out_dir, "Directory holding the CSVs")->required();
  extract_cmd->add_option("--client-net", extract.client_net, "Keep only clients inside this IPv4 CIDR");
  extract_cmd->add_option("--window-us", extract.window_micros, "Pairing window in microseconds")
      ->capture_default_str();

  EvaluateArgs evaluate;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Cross-validate all six algorithms");
  evaluate_cmd->add_option("--features-dir", evaluate.features_dir, "Directory holding the CSVs")->required();
  evaluate_cmd->add_option("--folds", evaluate.folds, "Number of folds")->capture_default_str();
  evaluate_cmd->add_option("--seed", evaluate.seed, "Random seed")->capture_default_str();
  evaluate_cmd->add_option("--out", evaluate.out, "Report JSON")->required();
  evaluate_cmd->add_flag("--record-timing", evaluate.record_timing, "Store wall-clock seconds in the manifest");
  add_train_options(evaluate_cmd, evaluate.train);

  SignificanceArgs significance;
  auto* significance_cmd = app.add_subcommand("significance", "Friedman test with Holm post-hoc");
  significance_cmd->add_option("--eval", significance.eval, "Evaluation report JSON")->required();
  significance_cmd->add_option("--baseline", significance.baseline, "Control algorithm")->capture_default_str();
  significance_cmd->add_option("--alpha", significance.alpha, "Significance level")->capture_default_str();
  significance_cmd->add_option("--out", significance.out, "Report JSON (stdout when omitted)");
  significance_cmd->add_flag("--record-timing", significance.record_timing, "Store wall-clock seconds in the manifest");

  ExperimentArgs experiment;
  auto* experiment_cmd = app.add_subcommand("run-experiment", "synth, extract, evaluate and significance in one go");
  experiment_cmd->add_option("--out-dir", experiment.out_dir, "Working directory")->required();
  experiment_cmd->add_option("--seed", experiment.seed, "Random seed")->capture_default_str();
  experiment_cmd->add_option("--pairs", experiment.pairs, "Queries per class")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  experiment_cmd->add_option("--loss", experiment.loss, "Fraction of unanswered queries")->capture_default_str();
  experiment_cmd->add_option("--folds", experiment.folds, "Number of folds")->capture_default_str();
  experiment_cmd->add_option("--baseline", experiment.baseline, "Control algorithm")->capture_default_str();
  experiment_cmd->add_option("--alpha", experiment.alpha, "Significance level")->capture_default_str();
  experiment_cmd->add_flag("--record-timing", experiment.record_timing, "Store wall-clock seconds in the manifests");
  add_train_options(experiment_cmd, experiment.train);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Fit one model on a feature CSV and save it");
  train_cmd->add_option("--features", train.features, "Feature CSV")->required();
  train_cmd->add_option("--kind", train.kind, "Feature set of the CSV")->capture_default_str()->check(
      CLI::IsMember(kKindNames));
  train_cmd->add_option("--model", train.model, "mlp or rf")->capture_default_str()->check(CLI::IsMember({"mlp", "rf"}));
  train_cmd->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  train_cmd->add_option("--out", train.out, "Model JSON")->required();
  add_train_options(train_cmd, train.train);

  PredictArgs pred;
  auto* predict_cmd = app.add_subcommand("predict", "Classify feature rows with a saved model");
  predict_cmd->add_option("--model", pred.model, "Model JSON")->required();
  predict_cmd->add_option("--features", pred.features, "Feature CSV")->required();
  predict_cmd->add_option("--kind", pred.kind, "Feature set of the CSV")->capture_default_str()->check(
      CLI::IsMember(kKindNames));
  predict_cmd->add_option("--out", pred.out, "Predictions CSV (stdout when omitted)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth, out);
    if (*extract_cmd) return cmd_extract(extract, out);
    if (*evaluate_cmd) return cmd_evaluate(evaluate, out);
    if (*significance_cmd) return cmd_significance(significance, out);
    if (*experiment_cmd) return cmd_run_experiment(experiment, out);
    if (*train_cmd) return cmd_train(train, out);
    if (*predict_cmd) return cmd_predict(pred, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}

}  // namespace dnsveil
