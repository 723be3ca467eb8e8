#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dnsveil/eval.hpp"
#include "dnsveil/models.hpp"
#include "dnsveil/stats.hpp"

namespace dnsveil {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

/// Provenance embedded in every report.
struct RunManifest {
  std::string subcommand;
  std::vector<std::string> inputs;
  std::vector<std::uint64_t> seeds;
  nlohmann::json config = nlohmann::json::object();
  std::string tool_version = kToolVersion;
  /// Left out of reports unless timing was requested, so reruns stay byte-identical.
  std::optional<double> wall_clock_seconds;

  nlohmann::json to_json() const;
};

nlohmann::json config_to_json(const TrainConfig& config);
TrainConfig config_from_json(const nlohmann::json& j);

nlohmann::json evaluation_report(const CrossValidationResult& result, const RunManifest& manifest);
nlohmann::json significance_report(const SignificanceReport& report, const RunManifest& manifest);

/// The fold-by-algorithm accuracy table stored in an evaluation report.
AccuracyTable accuracy_table_from_report(const nlohmann::json& report);

/// Pretty-printed JSON with a trailing newline.
std::string dump_report(const nlohmann::json& j);
void write_text_file(const std::string& path, const std::string& text);
nlohmann::json read_json_file(const std::string& path);

// ---------------------------------------------------------------------------
// Model files. Weights and thresholds are stored as 17-significant-digit
// decimal strings so they load back bit-identical.

using AnyModel = std::variant<MlpModel, RandomForestModel>;

nlohmann::json model_to_json(const AnyModel& model, const TrainConfig& config);
AnyModel model_from_json(const nlohmann::json& j);

void save_model(const AnyModel& model, const TrainConfig& config, const std::string& path);
AnyModel load_model(const std::string& path);

Prediction predict(const AnyModel& model, std::span<const double> features);

std::string exact_decimal(double value);
double parse_exact_decimal(const std::string& text);

}  // namespace dnsveil
