#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnsveil/pairing.hpp"

namespace dnsveil {

enum class TrafficClass : int { Normal = 0, SshTunnel = 1, SftpTunnel = 2, TelnetTunnel = 3 };

inline constexpr int kClassCount = 4;
inline constexpr std::array<TrafficClass, kClassCount> kAllClasses = {
    TrafficClass::Normal, TrafficClass::SshTunnel, TrafficClass::SftpTunnel, TrafficClass::TelnetTunnel};

/// "normal", "ssh", "sftp", "telnet".
std::string_view class_label(TrafficClass cls);
std::optional<TrafficClass> parse_class_label(std::string_view label);
inline int class_index(TrafficClass cls) { return static_cast<int>(cls); }

enum class FeatureSetKind { Query, Full, Response };

inline constexpr std::array<FeatureSetKind, 3> kAllKinds = {FeatureSetKind::Query, FeatureSetKind::Full,
                                                            FeatureSetKind::Response};

/// "query", "full", "response".
std::string_view kind_label(FeatureSetKind kind);
std::optional<FeatureSetKind> parse_kind_label(std::string_view label);
inline int feature_dim(FeatureSetKind kind) { return kind == FeatureSetKind::Full ? 6 : 3; }

/// Entropy, name length and IP packet length of one DNS message.
struct MessageFeatures {
  double name_entropy = 0.0;
  std::int64_t name_length = 0;
  std::int64_t ip_packet_length = 0;

  bool operator==(const MessageFeatures&) const = default;
};

struct FeatureRow {
  FeatureSetKind kind = FeatureSetKind::Query;
  std::optional<MessageFeatures> query;
  std::optional<MessageFeatures> response;
  TrafficClass label = TrafficClass::Normal;

  /// Numeric vector in CSV column order (query triple, then response triple).
  std::vector<double> values() const;

  bool operator==(const FeatureRow&) const = default;
};

/// Shannon entropy in nats over the byte-value distribution of `data`.
double shannon_entropy(ByteView data);

inline std::int64_t name_length(ByteView name) { return static_cast<std::int64_t>(name.size()); }

/// Bytes standing in for a response's "name": concatenated answer rdata in
/// wire order, or the question name when there are no answers.
Bytes response_name_bytes(const DnsPacketRecord& response);

/// Entropy rounded to the precision kept by feature files, so rows survive a
/// write/read cycle unchanged.
double quantize_feature(double value);

MessageFeatures message_features(ByteView name, std::uint32_t ip_packet_length);
MessageFeatures query_features(const DnsPacketRecord& query);
MessageFeatures response_features(const DnsPacketRecord& response);

/// Query: one row per pair. Response: one row per response, matched or orphan.
/// Full: one row per pair that has a response.
std::vector<FeatureRow> make_feature_rows(const std::vector<QueryResponsePair>& pairs,
                                          const std::vector<DnsPacketRecord>& orphan_responses,
                                          FeatureSetKind kind, TrafficClass label);

enum class FeatureFileErrorKind { MalformedRow, MixedKinds, IoError };
using FeatureFileError = KindedError<FeatureFileErrorKind>;

struct FeatureFile {
  FeatureSetKind kind = FeatureSetKind::Query;
  std::vector<FeatureRow> rows;
};

std::string feature_csv_header(FeatureSetKind kind);
std::string feature_file_name(FeatureSetKind kind);

/// Serializes rows as CSV (header included). Rows must all be of `kind`.
std::string format_feature_csv(const std::vector<FeatureRow>& rows, FeatureSetKind kind, bool with_header = true);

void write_feature_file(const std::vector<FeatureRow>& rows, FeatureSetKind kind, const std::string& path);

/// Appends rows, writing the header only when the file is new or empty.
/// Returns the number of bytes added to the file.
std::uint64_t append_feature_file(const std::vector<FeatureRow>& rows, FeatureSetKind kind,
                                  const std::string& path);

/// Query and Response files share a header, so the expected kind is given.
FeatureFile read_feature_file(const std::string& path, FeatureSetKind kind);
FeatureFile parse_feature_csv(std::string_view text, FeatureSetKind kind);

}  // namespace dnsveil
