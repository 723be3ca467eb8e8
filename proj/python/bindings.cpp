#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "dnsveil/cli.hpp"
#include "dnsveil/dns.hpp"
#include "dnsveil/eval.hpp"
#include "dnsveil/features.hpp"
#include "dnsveil/report.hpp"
#include "dnsveil/stats.hpp"
#include "dnsveil/synth.hpp"

namespace py = pybind11;
using namespace dnsveil;

namespace {

py::bytes as_bytes(const Bytes& b) { return py::bytes(reinterpret_cast<const char*>(b.data()), b.size()); }

Bytes from_bytes(const py::bytes& b) {
  const std::string s = b;
  return Bytes(s.begin(), s.end());
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

TrafficClass class_arg(const std::string& label) {
  const auto cls = parse_class_label(label);
  if (!cls) throw py::value_error("unknown class '" + label + "'");
  return *cls;
}

py::dict message_dict(const DnsMessage& m) {
  py::list answers;
  for (const auto& a : m.answers) {
    py::dict d;
    d["name"] = as_bytes(a.name);
    d["rtype"] = a.rtype;
    d["rdata"] = as_bytes(a.rdata_text);
    answers.append(d);
  }
  py::dict out;
  out["transaction_id"] = m.transaction_id;
  out["is_response"] = m.is_response;
  out["question_name"] = as_bytes(m.question_name);
  out["question_type"] = m.question_type;
  out["answers"] = answers;
  return out;
}

DnsMessage message_from_dict(const py::dict& d) {
  DnsMessage m;
  m.transaction_id = d["transaction_id"].cast<std::uint16_t>();
  m.is_response = d["is_response"].cast<bool>();
  m.question_name = from_bytes(d["question_name"].cast<py::bytes>());
  if (d.contains("question_type")) m.question_type = d["question_type"].cast<std::uint16_t>();
  if (d.contains("answers")) {
    for (const auto& item : d["answers"].cast<py::list>()) {
      const auto a = item.cast<py::dict>();
      m.answers.push_back({from_bytes(a["name"].cast<py::bytes>()), a["rtype"].cast<std::uint16_t>(),
                           from_bytes(a["rdata"].cast<py::bytes>())});
    }
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_dnsveil, m) {
  m.doc() = "DNS tunnel traffic features, models and significance tests";
  m.attr("__version__") = kToolVersion;

  static py::exception<Error> error_type(m, "DnsveilError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  m.def(
      "shannon_entropy", [](const py::bytes& data) { return shannon_entropy(from_bytes(data)); }, py::arg("data"),
      "Entropy in nats of the byte distribution of `data`.");

  m.def(
      "decode_dns", [](const py::bytes& payload) { return message_dict(parse_dns_datagram(from_bytes(payload))); },
      py::arg("payload"));
  m.def(
      "encode_dns", [](const py::dict& message) { return as_bytes(encode_dns_message(message_from_dict(message))); },
      py::arg("message"));

  m.def(
      "synth",
      [](const std::string& cls, int pairs, std::uint64_t seed, const std::string& out, double loss) {
        SynthConfig config;
        config.cls = class_arg(cls);
        config.pair_count = pairs;
        config.seed = seed;
        config.response_loss_rate = loss;
        config.validate();
        const auto generated = generate_pairs(config);
        write_pcap(generated, out);
        std::size_t responses = 0;
        for (const auto& p : generated) responses += p.response ? 1U : 0U;
        return generated.size() + responses;
      },
      py::arg("cls"), py::arg("pairs"), py::arg("seed"), py::arg("out"), py::arg("loss") = 0.02,
      "Writes a synthetic pcap and returns its frame count.");

  m.def(
      "extract",
      [](const std::vector<std::string>& inputs, const std::string& label, const std::string& out_dir,
         const std::string& client_net) {
        const auto s = extract_features(inputs, class_arg(label), out_dir, client_net);
        py::dict d;
        d["frames"] = s.frames;
        d["dns_records"] = s.dns_records;
        d["pairs"] = s.pairs;
        d["orphan_responses"] = s.orphan_responses;
        d["rows"] = py::make_tuple(s.rows[0], s.rows[1], s.rows[2]);
        d["input_bytes"] = s.input_bytes;
        d["output_bytes"] = s.output_bytes;
        d["reduction_percent"] = s.reduction_percent();
        return d;
      },
      py::arg("inputs"), py::arg("label"), py::arg("out_dir"), py::arg("client_net") = "");

  m.def(
      "feature_rows",
      [](const std::string& path, const std::string& kind) {
        const auto k = parse_kind_label(kind);
        if (!k) throw py::value_error("unknown feature set '" + kind + "'");
        py::list rows;
        for (const auto& row : read_feature_file(path, *k).rows) {
          rows.append(py::make_tuple(row.values(), std::string(class_label(row.label))));
        }
        return rows;
      },
      py::arg("path"), py::arg("kind"));

  m.def(
      "evaluate",
      [](const std::string& features_dir, int folds, std::uint64_t seed, int rf_trees, int mlp_max_epochs) {
        FeatureSets sets;
        for (auto kind : kAllKinds) {
          auto rows = read_feature_file(features_dir + "/" + feature_file_name(kind), kind).rows;
          if (kind == FeatureSetKind::Query) sets.query = std::move(rows);
          if (kind == FeatureSetKind::Full) sets.full = std::move(rows);
          if (kind == FeatureSetKind::Response) sets.response = std::move(rows);
        }
        TrainConfig config;
        config.seed = seed;
        config.rf_trees = rf_trees;
        config.mlp_max_epochs = mlp_max_epochs;
        CrossValidationResult result;
        {
          py::gil_scoped_release release;
          result = run_cross_validation(sets, config, folds);
        }
        RunManifest manifest;
        manifest.subcommand = "evaluate";
        manifest.inputs = {features_dir};
        manifest.seeds = {seed};
        manifest.config = config_to_json(config);
        manifest.config["folds"] = folds;
        return to_python(evaluation_report(result, manifest));
      },
      py::arg("features_dir"), py::arg("folds") = 20, py::arg("seed") = 1, py::arg("rf_trees") = 100,
      py::arg("mlp_max_epochs") = 200, "Cross-validates the six algorithms and returns the report as a dict.");

  m.def(
      "friedman",
      [](const std::vector<std::vector<double>>& accuracy) {
        const auto ranks = friedman_ranks(accuracy);
        return py::make_tuple(ranks.mean_ranks, friedman_statistic(ranks));
      },
      py::arg("accuracy"), "Mean ranks and the Friedman chi-square of a fold-by-algorithm table.");

  m.def(
      "significance",
      [](const std::vector<std::vector<double>>& accuracy, const std::vector<std::string>& labels,
         const std::string& baseline, double alpha) {
        AccuracyTable table;
        table.algorithms = labels;
        table.accuracy = accuracy;
        RunManifest manifest;
        manifest.subcommand = "significance";
        manifest.config = {{"baseline", baseline}, {"alpha", alpha}};
        return to_python(significance_report(run_significance(table, baseline, alpha), manifest));
      },
      py::arg("accuracy"), py::arg("labels"), py::arg("baseline") = "mlp-query", py::arg("alpha") = 0.05);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line in-process; returns (exit code, stdout, stderr).");
}
