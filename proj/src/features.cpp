#include "dnsveil/features.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace dnsveil {

namespace {

[[noreturn]] void fail(FeatureFileErrorKind kind, const std::string& message) {
  static constexpr const char* kCodes[] = {"MalformedRow", "MixedKinds", "IoError"};
  throw FeatureFileError(kind, kCodes[static_cast<int>(kind)], message);
}

constexpr int kEntropyDigits = 9;

void append_double(std::string& out, double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, kEntropyDigits);
  out.append(buf, res.ptr);
}

void append_triple(std::string& out, const MessageFeatures& f) {
  append_double(out, f.name_entropy);
  out += ',';
  out += std::to_string(f.name_length);
  out += ',';
  out += std::to_string(f.ip_packet_length);
}

double parse_real(std::string_view field, std::size_t line) {
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(value)) {
    fail(FeatureFileErrorKind::MalformedRow, "line " + std::to_string(line) + ": bad number '" +
                                                 std::string(field) + "'");
  }
  return value;
}

std::int64_t parse_integer(std::string_view field, std::size_t line) {
  std::int64_t value = 0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size() || value < 0) {
    fail(FeatureFileErrorKind::MalformedRow, "line " + std::to_string(line) + ": bad length '" +
                                                 std::string(field) + "'");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::string_view class_label(TrafficClass cls) {
  switch (cls) {
    case TrafficClass::Normal: return "normal";
    case TrafficClass::SshTunnel: return "ssh";
    case TrafficClass::SftpTunnel: return "sftp";
    case TrafficClass::TelnetTunnel: return "telnet";
  }
  return "normal";
}

std::optional<TrafficClass> parse_class_label(std::string_view label) {
  for (auto cls : kAllClasses) {
    if (class_label(cls) == label) return cls;
  }
  return std::nullopt;
}

std::string_view kind_label(FeatureSetKind kind) {
  switch (kind) {
    case FeatureSetKind::Query: return "query";
    case FeatureSetKind::Full: return "full";
    case FeatureSetKind::Response: return "response";
  }
  return "query";
}

std::optional<FeatureSetKind> parse_kind_label(std::string_view label) {
  for (auto kind : kAllKinds) {
    if (kind_label(kind) == label) return kind;
  }
  return std::nullopt;
}

std::vector<double> FeatureRow::values() const {
  std::vector<double> out;
  out.reserve(6);
  for (const auto* side : {&query, &response}) {
    if (!side->has_value()) continue;
    out.push_back((*side)->name_entropy);
    out.push_back(static_cast<double>((*side)->name_length));
    out.push_back(static_cast<double>((*side)->ip_packet_length));
  }
  return out;
}

double shannon_entropy(ByteView data) {
  if (data.empty()) return 0.0;
  std::array<std::size_t, 256> counts{};
  for (std::uint8_t b : data) ++counts[b];
  const double n = static_cast<double>(data.size());
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log(p);
  }
  // A single repeated symbol can leave -0.0 behind.
  return h > 0.0 ? h : 0.0;
}

Bytes response_name_bytes(const DnsPacketRecord& response) {
  if (response.answers.empty()) return response.question_name;
  Bytes out;
  for (const auto& answer : response.answers) {
    out.insert(out.end(), answer.rdata_text.begin(), answer.rdata_text.end());
  }
  return out;
}

double quantize_feature(double value) {
  std::string text;
  append_double(text, value);
  double out = 0.0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

MessageFeatures message_features(ByteView name, std::uint32_t ip_packet_length) {
  return {quantize_feature(shannon_entropy(name)), name_length(name), ip_packet_length};
}

MessageFeatures query_features(const DnsPacketRecord& query) {
  return message_features(query.question_name, query.ip_packet_length);
}

MessageFeatures response_features(const DnsPacketRecord& response) {
  return message_features(response_name_bytes(response), response.ip_packet_length);
}

std::vector<FeatureRow> make_feature_rows(const std::vector<QueryResponsePair>& pairs,
                                          const std::vector<DnsPacketRecord>& orphan_responses,
                                          FeatureSetKind kind, TrafficClass label) {
  std::vector<FeatureRow> rows;
  switch (kind) {
    case FeatureSetKind::Query:
      rows.reserve(pairs.size());
      for (const auto& pair : pairs) rows.push_back({kind, query_features(pair.query), std::nullopt, label});
      break;
    case FeatureSetKind::Full:
      for (const auto& pair : pairs) {
        if (!pair.response) continue;
        rows.push_back({kind, query_features(pair.query), response_features(*pair.response), label});
      }
      break;
    case FeatureSetKind::Response:
      for (const auto& pair : pairs) {
        if (!pair.response) continue;
        rows.push_back({kind, std::nullopt, response_features(*pair.response), label});
      }
      for (const auto& orphan : orphan_responses) {
        rows.push_back({kind, std::nullopt, response_features(orphan), label});
      }
      break;
  }
  return rows;
}

std::string feature_csv_header(FeatureSetKind kind) {
  return kind == FeatureSetKind::Full ? "q_entropy,q_name_len,q_ip_len,r_entropy,r_name_len,r_ip_len,label"
                                      : "entropy,name_len,ip_len,label";
}

std::string feature_file_name(FeatureSetKind kind) { return std::string(kind_label(kind)) + ".csv"; }

std::string format_feature_csv(const std::vector<FeatureRow>& rows, FeatureSetKind kind, bool with_header) {
  std::string out;
  out.reserve(rows.size() * 48 + 80);
  if (with_header) {
    out += feature_csv_header(kind);
    out += '\n';
  }
  for (const auto& row : rows) {
    const bool shape_ok = row.kind == kind && row.query.has_value() == (kind != FeatureSetKind::Response) &&
                          row.response.has_value() == (kind != FeatureSetKind::Query);
    if (!shape_ok) fail(FeatureFileErrorKind::MixedKinds, "row does not match feature set " + std::string(kind_label(kind)));
    if (row.query) append_triple(out, *row.query);
    if (row.query && row.response) out += ',';
    if (row.response) append_triple(out, *row.response);
    out += ',';
    out += class_label(row.label);
    out += '\n';
  }
  return out;
}

void write_feature_file(const std::vector<FeatureRow>& rows, FeatureSetKind kind, const std::string& path) {
  const std::string text = format_feature_csv(rows, kind);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(FeatureFileErrorKind::IoError, "cannot create " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(FeatureFileErrorKind::IoError, "write failed on " + path);
}

std::uint64_t append_feature_file(const std::vector<FeatureRow>& rows, FeatureSetKind kind,
                                  const std::string& path) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  if (!fresh) {
    std::ifstream in(path, std::ios::binary);
    std::string header;
    std::getline(in, header);
    if (header != feature_csv_header(kind)) {
      fail(FeatureFileErrorKind::MixedKinds, path + " already holds a different feature set");
    }
  }
  const std::string text = format_feature_csv(rows, kind, fresh);
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) fail(FeatureFileErrorKind::IoError, "cannot open " + path);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(FeatureFileErrorKind::IoError, "write failed on " + path);
  return text.size();
}

FeatureFile parse_feature_csv(std::string_view text, FeatureSetKind kind) {
  FeatureFile file;
  file.kind = kind;
  const std::size_t expected = kind == FeatureSetKind::Full ? 7 : 4;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool have_header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!have_header) {
      if (line != feature_csv_header(kind)) {
        fail(FeatureFileErrorKind::MalformedRow, "line 1: expected header '" + feature_csv_header(kind) +
                                                     "', got '" + std::string(line) + "'");
      }
      have_header = true;
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != expected) {
      fail(FeatureFileErrorKind::MalformedRow, "line " + std::to_string(line_no) + ": expected " +
                                                   std::to_string(expected) + " columns, got " +
                                                   std::to_string(fields.size()));
    }
    const auto label = parse_class_label(fields.back());
    if (!label) {
      fail(FeatureFileErrorKind::MalformedRow,
           "line " + std::to_string(line_no) + ": unknown label '" + std::string(fields.back()) + "'");
    }
    auto triple = [&](std::size_t at) {
      return MessageFeatures{parse_real(fields[at], line_no), parse_integer(fields[at + 1], line_no),
                             parse_integer(fields[at + 2], line_no)};
    };
    FeatureRow row;
    row.kind = kind;
    row.label = *label;
    switch (kind) {
      case FeatureSetKind::Query: row.query = triple(0); break;
      case FeatureSetKind::Response: row.response = triple(0); break;
      case FeatureSetKind::Full:
        row.query = triple(0);
        row.response = triple(3);
        break;
    }
    file.rows.push_back(std::move(row));
  }
  if (!have_header) fail(FeatureFileErrorKind::MalformedRow, "missing header line");
  return file;
}

FeatureFile read_feature_file(const std::string& path, FeatureSetKind kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(FeatureFileErrorKind::IoError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_feature_csv(buffer.str(), kind);
  } catch (const FeatureFileError& e) {
    throw FeatureFileError(e.kind(), e.code(), path + ": " + e.what());
  }
}

}  // namespace dnsveil
