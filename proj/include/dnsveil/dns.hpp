#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dnsveil/error.hpp"

namespace dnsveil {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

namespace rtype {
inline constexpr std::uint16_t A = 1;
inline constexpr std::uint16_t NS = 2;
inline constexpr std::uint16_t CNAME = 5;
inline constexpr std::uint16_t MX = 15;
inline constexpr std::uint16_t TXT = 16;
inline constexpr std::uint16_t AAAA = 28;
inline constexpr std::uint16_t OPT = 41;
}  // namespace rtype

/// Longest name (in presentation bytes) accepted from the wire.
inline constexpr std::size_t kMaxNameLength = 255;
inline constexpr std::size_t kMaxLabelLength = 63;
/// Classic DNS-over-UDP payload ceiling.
inline constexpr std::size_t kMaxUdpDnsPayload = 512;

struct AnswerRecord {
  Bytes name;
  std::uint16_t rtype = 0;
  /// CNAME/NS/MX: decoded target name. TXT: concatenated character-strings.
  /// Anything else: the raw rdata.
  Bytes rdata_text;

  bool operator==(const AnswerRecord&) const = default;
};

struct DnsMessage {
  std::uint16_t transaction_id = 0;
  bool is_response = false;
  Bytes question_name;
  std::uint16_t question_type = rtype::A;
  std::vector<AnswerRecord> answers;

  bool operator==(const DnsMessage&) const = default;
};

enum class DnsErrorKind { Truncated, PointerLoop, ZeroQuestions, BadLabel, Unencodable };

using DnsError = KindedError<DnsErrorKind>;

/// Decodes the header, the first question and all answer records of a DNS
/// message. Authority and additional sections are not read.
DnsMessage parse_dns_datagram(ByteView payload);

/// Wire encoding used by the traffic generator. Answer names equal to the
/// question name are written as a compression pointer to offset 12; all
/// other names are written uncompressed. TXT payloads are split into
/// 255-byte character-strings.
Bytes encode_dns_message(const DnsMessage& message);

/// Byte helpers shared by the name codecs.
Bytes to_bytes(std::string_view text);
std::string to_string(ByteView bytes);

}  // namespace dnsveil
