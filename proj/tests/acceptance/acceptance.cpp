// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// Usage: dnsveil_acceptance [--work-dir DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dnsveil/cli.hpp"
#include "dnsveil/dns.hpp"
#include "dnsveil/features.hpp"
#include "dnsveil/models.hpp"
#include "dnsveil/pairing.hpp"
#include "dnsveil/report.hpp"
#include "dnsveil/stats.hpp"
#include "dnsveil/synth.hpp"
#include "oracles.hpp"

using namespace dnsveil;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Outcome& o) {
  std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << ": " << o.detail << std::endl;
  if (!o.pass) ++failures;
}

void run(const std::string& name, const std::function<Outcome()>& body) {
  try {
    report(name, body());
  } catch (const std::exception& e) {
    report(name, {false, std::string("exception: ") + e.what()});
  }
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

Bytes random_bytes(std::mt19937_64& gen, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(gen());
  return out;
}

// ---------------------------------------------------------------------------

Outcome entropy_oracle() {
  std::mt19937_64 gen(101);
  std::vector<Bytes> inputs;
  for (int i = 0; i < 10000; ++i) {
    // Small alphabets on half the strings so repeated bytes are common.
    Bytes b = random_bytes(gen, gen() % 256);
    if (i % 2) {
      const unsigned alphabet = 1 + static_cast<unsigned>(gen() % 16);
      for (auto& x : b) x = static_cast<std::uint8_t>(x % alphabet);
    }
    inputs.push_back(std::move(b));
  }
  const auto start = Clock::now();
  std::vector<double> got;
  got.reserve(inputs.size());
  for (const auto& b : inputs) got.push_back(shannon_entropy(b));
  const double elapsed = seconds_since(start);
  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) worst = std::max(worst, std::fabs(got[i] - oracle::entropy(inputs[i])));
  return {worst <= 1e-12 && elapsed < 1.0,
          "max |diff| " + fmt(worst) + " over 10000 strings, " + fmt(elapsed, 3) + " s"};
}

Outcome analytic_entropy() {
  const double a = shannon_entropy(to_bytes("aaaa"));
  const double b = shannon_entropy(to_bytes("abab"));
  const double c = shannon_entropy(to_bytes("abcd"));
  const bool ok = std::fabs(a) <= 1e-12 && std::fabs(b - std::log(2.0)) <= 1e-12 && std::fabs(c - std::log(4.0)) <= 1e-12;
  return {ok, "aaaa " + fmt(a, 17) + ", abab " + fmt(b, 17) + ", abcd " + fmt(c, 17)};
}

Outcome parser_round_trip() {
  const auto start = Clock::now();
  int messages = 0;
  int mismatches = 0;
  std::vector<Bytes> wires;
  for (std::size_t c = 0; c < kAllClasses.size(); ++c) {
    SynthConfig cfg;
    cfg.cls = kAllClasses[c];
    cfg.pair_count = 1250;
    cfg.seed = 200 + c;
    cfg.response_loss_rate = 0.0;
    for (const auto& p : generate_pairs(cfg)) {
      for (const auto* rec : {&p.query, &*p.response}) {
        const DnsMessage msg{rec->transaction_id, rec->is_response, rec->question_name, rec->question_type, rec->answers};
        Bytes wire = encode_dns_message(msg);
        if (!(parse_dns_datagram(wire) == msg)) ++mismatches;
        ++messages;
        wires.push_back(std::move(wire));
      }
    }
  }

  std::mt19937_64 gen(303);
  int fuzzed = 0;
  int rejected = 0;
  for (int i = 0; i < 100000; ++i) {
    Bytes payload;
    if (i % 2 == 0) {
      payload = random_bytes(gen, gen() % 601);
    } else {
      // Mutate a valid message so the parser gets past the header more often.
      payload = wires[gen() % wires.size()];
      const int flips = 1 + static_cast<int>(gen() % 8);
      for (int f = 0; f < flips; ++f) payload[gen() % payload.size()] = static_cast<std::uint8_t>(gen());
      payload.resize(std::min<std::size_t>(payload.size(), gen() % 601));
    }
    try {
      (void)parse_dns_datagram(payload);
    } catch (const DnsError&) {
      ++rejected;
    }
    ++fuzzed;
  }
  const double elapsed = seconds_since(start);
  return {messages == 10000 && mismatches == 0 && elapsed < 30.0,
          std::to_string(messages) + " messages, " + std::to_string(mismatches) + " mismatches; " + std::to_string(fuzzed) +
              " fuzz inputs without a crash (" + std::to_string(rejected) + " rejected); " + fmt(elapsed, 3) + " s"};
}

Outcome pairing_oracle() {
  std::mt19937_64 gen(404);
  const auto start = Clock::now();
  int mismatched = 0;
  std::size_t records_total = 0;
  for (int stream = 0; stream < 1000; ++stream) {
    const std::int64_t window = 1000 + static_cast<std::int64_t>(gen() % 50000);
    std::vector<DnsPacketRecord> records;
    std::int64_t t = 0;
    const int queries = 1 + static_cast<int>(gen() % 80);
    for (int q = 0; q < queries; ++q) {
      t += static_cast<std::int64_t>(gen() % 3000);
      DnsPacketRecord r;
      r.timestamp_micros = t;
      r.transaction_id = static_cast<std::uint16_t>(gen() % 4);
      r.question_name = to_bytes(gen() % 2 ? "a.example" : "b.example");
      r.client_port = static_cast<std::uint16_t>(5000 + gen() % 2);
      r.client_addr = Ipv4Address::from_octets(192, 168, 0, static_cast<std::uint8_t>(1 + gen() % 2));
      r.server_addr = Ipv4Address::from_octets(10, 0, 0, 53);
      r.ip_packet_length = static_cast<std::uint32_t>(q);
      records.push_back(r);
      const auto roll = gen() % 10;
      if (roll == 0) continue;  // lost
      auto resp = r;
      resp.is_response = true;
      // Mostly in window, sometimes just past it, sometimes right at the edge.
      resp.timestamp_micros = t + (roll == 1   ? window + 1 + static_cast<std::int64_t>(gen() % 1000)
                                   : roll == 2 ? window
                                               : static_cast<std::int64_t>(gen() % static_cast<std::uint64_t>(window)));
      records.push_back(resp);
      if (roll == 3) records.push_back(resp);  // duplicate response
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const DnsPacketRecord& a, const DnsPacketRecord& b) { return a.timestamp_micros < b.timestamp_micros; });
    records_total += records.size();
    const auto got = pair_streams(records, window);
    const auto want = oracle::earliest_match(records, window);
    bool same = got.pairs.size() == want.query_indices.size() && got.orphan_responses.size() == want.orphan_indices.size();
    for (std::size_t i = 0; same && i < want.query_indices.size(); ++i) {
      same = got.pairs[i].query == records[want.query_indices[i]] &&
             got.pairs[i].response.has_value() == want.response_of_query[i].has_value() &&
             (!got.pairs[i].response || *got.pairs[i].response == records[*want.response_of_query[i]]);
    }
    for (std::size_t i = 0; same && i < want.orphan_indices.size(); ++i) {
      same = got.orphan_responses[i] == records[want.orphan_indices[i]];
    }
    if (!same) ++mismatched;
  }
  const double elapsed = seconds_since(start);
  return {mismatched == 0 && elapsed < 10.0, "1000 streams (" + std::to_string(records_total) + " records), " +
                                                 std::to_string(mismatched) + " mismatches, " + fmt(elapsed, 3) + " s"};
}

Outcome gradient_check() {
  constexpr double kEps = 1e-5;
  // Only guards 0/0 when both derivatives vanish exactly.
  constexpr double kFloor = std::numeric_limits<double>::min();
  std::mt19937_64 gen(505);
  const auto start = Clock::now();
  double worst = 0.0;
  std::size_t weights = 0;
  for (int config = 0; config < 20; ++config) {
    const int dim = config % 2 ? 6 : 3;
    const int hidden = 2 + static_cast<int>(gen() % 20);
    const auto model = init_mlp({dim, hidden, kClassCount}, gen());
    std::normal_distribution<double> feat(0.0, 1.5);
    Dataset batch;
    batch.feature_dim = dim;
    const int samples = 1 + static_cast<int>(gen() % 16);
    for (int s = 0; s < samples; ++s) {
      for (int f = 0; f < dim; ++f) batch.values.push_back(feat(gen));
      batch.labels.push_back(static_cast<int>(gen() % kClassCount));
    }
    const auto grad = mlp_loss_gradient(model, batch);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
      for (Eigen::Index k = 0; k < model.layers[l].size(); ++k) {
        auto layers = model.layers;
        const double w0 = layers[l].data()[k];
        layers[l].data()[k] = w0 + kEps;
        const long double up = oracle::mlp_loss(layers, batch);
        layers[l].data()[k] = w0 - kEps;
        const long double down = oracle::mlp_loss(layers, batch);
        const double numeric = static_cast<double>((up - down) / (2.0L * kEps));
        const double analytic = grad.layers[l].data()[k];
        worst = std::max(worst, std::fabs(analytic - numeric) / std::max({std::fabs(analytic), std::fabs(numeric), kFloor}));
        ++weights;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-6 && elapsed < 10.0, "20 configurations, " + std::to_string(weights) +
                                               " weights, worst relative error " + fmt(worst) + ", " +
                                               fmt(elapsed, 3) + " s"};
}

Outcome statistics_fixtures() {
  std::vector<std::string> bad;
  const auto hand = friedman_ranks(std::vector<std::vector<double>>{{0.9, 0.8, 0.7}, {0.9, 0.8, 0.7}});
  const double chi2 = friedman_statistic(hand);
  if (chi2 != 4.0) bad.push_back("hand chi2 " + fmt(chi2, 17));
  try {
    (void)iman_davenport(chi2, 2, 3);
    bad.push_back("singular Iman-Davenport not detected");
  } catch (const StatsError& e) {
    if (e.kind() != StatsErrorKind::SingularDenominator) bad.push_back("wrong Iman-Davenport error");
  }
  const double fc = f_critical(0.05, 5, 95);
  if (std::fabs(fc - 2.31) > 0.01) bad.push_back("f_critical(0.05, 5, 95) = " + fmt(fc));

  const auto decided = [](const std::vector<HolmStep>& steps, const std::vector<bool>& expect) {
    if (steps.size() != expect.size()) return false;
    for (std::size_t i = 0; i < steps.size(); ++i) {
      if (steps[i].reject != expect[i]) return false;
    }
    return true;
  };
  const auto h1 = holm_stepdown({0.001, 0.002, 0.003}, 0.05);
  if (!decided(h1, {true, true, true}) || std::fabs(h1[0].threshold - 0.05 / 3) > 1e-15 || h1[1].threshold != 0.025 ||
      h1[2].threshold != 0.05) {
    bad.push_back("holm (0.001, 0.002, 0.003)");
  }
  const auto h2 = holm_stepdown({0.04, 0.001}, 0.05);
  if (!decided(h2, {true, true}) || h2[0].index != 1 || h2[0].threshold != 0.025 || h2[1].threshold != 0.05) {
    bad.push_back("holm (0.04, 0.001)");
  }
  if (!decided(holm_stepdown({0.5, 0.6}, 0.05), {false, false})) bad.push_back("holm (0.5, 0.6)");

  std::mt19937_64 gen(606);
  int tables = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t k = 2 + gen() % 9;
    const std::size_t n = 2 + gen() % 29;
    std::vector<std::vector<double>> acc(n, std::vector<double>(k));
    for (auto& row : acc) {
      for (auto& v : row) v = static_cast<double>(gen() % 6) / 5.0;
    }
    for (const auto& row : friedman_ranks(acc).ranks) {
      double s = 0.0;
      for (double r : row) s += r;
      if (s != static_cast<double>(k * (k + 1)) / 2.0) {
        bad.push_back("rank sum " + fmt(s) + " with k = " + std::to_string(k));
        break;
      }
    }
    ++tables;
  }
  std::string detail = "chi2 " + fmt(chi2) + ", F(5, 95) critical " + fmt(fc) + ", rank sums on " +
                       std::to_string(tables) + " tables";
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty(), detail};
}

// ---------------------------------------------------------------------------
// End-to-end criteria share one run-experiment invocation.

struct Experiment {
  bool ok = false;
  std::string error;
  double seconds = 0.0;
  fs::path dir;
};

Experiment run_experiment(const fs::path& dir) {
  Experiment e;
  e.dir = dir;
  fs::remove_all(dir);
  std::ostringstream out;
  std::ostringstream err;
  const auto start = Clock::now();
  const int code = run_cli({"run-experiment", "--out-dir", dir.string(), "--seed", "1", "--pairs", "5000", "--folds", "20"},
                           out, err);
  e.seconds = seconds_since(start);
  e.ok = code == 0;
  if (!e.ok) e.error = "run-experiment exited " + std::to_string(code) + ": " + err.str();
  return e;
}

const nlohmann::json* find_algorithm(const nlohmann::json& eval, const std::string& label) {
  for (const auto& a : eval["algorithms"]) {
    if (a["algorithm"] == label) return &a;
  }
  return nullptr;
}

Outcome end_to_end(const Experiment& e) {
  if (!e.ok) return {false, e.error};
  const auto eval = read_json_file((e.dir / "evaluation.json").string());
  std::vector<std::string> bad;
  const auto acc = [&](const std::string& label) {
    const auto* a = find_algorithm(eval, label);
    if (!a) throw std::runtime_error("missing algorithm " + label);
    return (*a)["accuracy"].get<double>();
  };
  const double rq = acc("rf-query");
  const double rf = acc("rf-full");
  const double rr = acc("rf-response");
  if (!(rf >= rq)) bad.push_back("rf-full below rf-query");
  if (!(rf >= rr)) bad.push_back("rf-full below rf-response");
  std::string normal;
  for (const std::string label : {"mlp-full", "rf-full"}) {
    const auto& n = (*find_algorithm(eval, label))["per_class"]["normal"];
    const double p = n["precision"].get<double>();
    const double r = n["recall"].get<double>();
    normal += ", " + label + " normal P/R " + fmt(p) + "/" + fmt(r);
    if (!(p >= 0.99 && r >= 0.99)) bad.push_back(label + " normal precision/recall below 0.99");
  }
  if (eval["folds"] != 20) bad.push_back("folds " + eval["folds"].dump());
  if (!(e.seconds < 600.0)) bad.push_back("runtime over 10 min");
  std::string detail = "rf accuracy query/full/response " + fmt(rq) + "/" + fmt(rf) + "/" + fmt(rr) + normal + ", " +
                       fmt(e.seconds, 4) + " s";
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty(), detail};
}

Outcome significance_pipeline(const Experiment& e) {
  if (!e.ok) return {false, e.error};
  const auto sig = read_json_file((e.dir / "significance.json").string());
  std::vector<std::string> bad;
  if (sig["N"] != 20) bad.push_back("N " + sig["N"].dump());
  if (sig["k"] != 6) bad.push_back("k " + sig["k"].dump());
  if (sig["dof"] != nlohmann::json::array({5, 95})) bad.push_back("dof " + sig["dof"].dump());
  for (const char* key : {"mean_ranks", "chi2_f", "f_f", "f_critical", "friedman_reject", "baseline_algorithm"}) {
    if (!sig.contains(key)) bad.push_back(std::string("missing ") + key);
  }
  const bool reject = sig.value("friedman_reject", false);
  if (reject && sig["posthoc"].size() != 5) bad.push_back("posthoc rows " + std::to_string(sig["posthoc"].size()));
  for (const auto& row : sig["posthoc"]) {
    for (const char* key : {"algorithm", "z", "p", "adjusted_threshold", "reject"}) {
      if (!row.contains(key)) bad.push_back(std::string("posthoc row missing ") + key);
    }
  }

  AccuracyTable identical;
  identical.algorithms = {"mlp-query", "mlp-full", "mlp-response", "rf-query", "rf-full", "rf-response"};
  identical.accuracy.assign(20, std::vector<double>(6, 0.9));
  const auto flat = run_significance(identical, "mlp-query", 0.05);
  if (flat.friedman_reject) bad.push_back("identical table rejected");

  std::string detail = "N " + sig["N"].dump() + ", k " + sig["k"].dump() + ", dof " + sig["dof"].dump() +
                       ", friedman_reject " + (reject ? "true" : "false") + ", " +
                       std::to_string(sig["posthoc"].size()) + " Holm rows; identical table reject " +
                       (flat.friedman_reject ? "true" : "false");
  for (const auto& b : bad) detail += "; " + b;
  return {bad.empty(), detail};
}

std::uintmax_t bytes_in(const fs::path& dir, const std::string& ext) {
  std::uintmax_t total = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ext) total += entry.file_size();
  }
  return total;
}

Outcome size_reduction(const Experiment& e) {
  if (!e.ok) return {false, e.error};
  const auto pcap = bytes_in(e.dir / "pcap", ".pcap");
  const auto csv = bytes_in(e.dir / "features", ".csv");
  const double ratio = static_cast<double>(csv) / static_cast<double>(pcap);
  return {ratio <= 0.10, "feature CSV bytes " + std::to_string(csv) + " / pcap bytes " + std::to_string(pcap) + " = " +
                             fmt(100.0 * ratio, 4) + "% (limit 10%)"};
}

Outcome determinism(const Experiment& first, const fs::path& second_dir) {
  if (!first.ok) return {false, first.error};
  const auto second = run_experiment(second_dir);
  if (!second.ok) return {false, second.error};
  std::vector<std::string> differ;
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::vector<fs::path> compared;
  for (const auto& rel : {fs::path("evaluation.json"), fs::path("significance.json"), fs::path("features/query.csv"),
                          fs::path("features/full.csv"), fs::path("features/response.csv")}) {
    compared.push_back(rel);
  }
  for (const auto& entry : fs::directory_iterator(first.dir / "pcap")) compared.push_back("pcap" / entry.path().filename());
  for (const auto& rel : compared) {
    if (slurp(first.dir / rel) != slurp(second.dir / rel)) differ.push_back(rel.string());
  }
  std::string detail = std::to_string(compared.size()) + " files compared across two runs with seed 1";
  for (const auto& d : differ) detail += "; differs: " + d;
  return {differ.empty(), detail};
}

}  // namespace

int main(int argc, char** argv) {
  fs::path work = fs::temp_directory_path() / "dnsveil_acceptance";
  for (int i = 1; i + 1 < argc; ++i) {
    if (std::strcmp(argv[i], "--work-dir") == 0) work = argv[i + 1];
  }
  fs::create_directories(work);

  run("Entropy oracle", entropy_oracle);
  run("Analytic entropy values", analytic_entropy);
  run("Parser round-trip", parser_round_trip);
  run("Pairing oracle", pairing_oracle);
  run("MLP gradient check", gradient_check);
  run("Statistics fixtures", statistics_fixtures);

  const Experiment first = run_experiment(work / "run1");
  run("End-to-end directional reproduction", [&] { return end_to_end(first); });
  run("Significance pipeline", [&] { return significance_pipeline(first); });
  run("Size reduction", [&] { return size_reduction(first); });
  run("Determinism", [&] { return determinism(first, work / "run2"); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
