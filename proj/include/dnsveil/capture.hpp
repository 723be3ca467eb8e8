#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "dnsveil/dns.hpp"

namespace dnsveil {

/// IPv4 address in host order.
struct Ipv4Address {
  std::uint32_t value = 0;

  static Ipv4Address from_octets(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
    return {(std::uint32_t{a} << 24) | (std::uint32_t{b} << 16) | (std::uint32_t{c} << 8) | d};
  }
  std::string to_string() const;

  auto operator<=>(const Ipv4Address&) const = default;
};

/// A contiguous block of addresses given in CIDR form ("10.0.0.0/8").
struct Ipv4Network {
  Ipv4Address base;
  int prefix = 0;

  static Ipv4Network parse(const std::string& cidr);
  bool contains(Ipv4Address addr) const;
};

struct RawFrame {
  std::int64_t timestamp_micros = 0;
  Bytes captured_bytes;
  std::uint32_t original_length = 0;
  /// Record-header timestamp fields exactly as stored on disk (fraction is
  /// microseconds or nanoseconds depending on the file magic).
  std::uint32_t ts_seconds = 0;
  std::uint32_t ts_fraction = 0;
};

struct PcapHeader {
  std::uint32_t magic = 0xA1B2C3D4;
  bool swapped = false;
  bool nanosecond = false;
  std::uint16_t version_major = 2;
  std::uint16_t version_minor = 4;
  std::int32_t thiszone = 0;
  std::uint32_t sigfigs = 0;
  std::uint32_t snaplen = 65535;
  std::uint32_t linktype = 1;
};

inline constexpr std::uint32_t kLinkTypeEthernet = 1;

enum class CaptureErrorKind { BadMagic, UnsupportedLinkType, TruncatedFrame, IoError };

using CaptureError = KindedError<CaptureErrorKind>;

/// Sequential reader over a classic libpcap file. Frames are produced lazily,
/// in file order.
class PcapReader {
 public:
  explicit PcapReader(const std::string& path);

  const PcapHeader& header() const { return header_; }

  /// Next frame, or nullopt at end of file.
  std::optional<RawFrame> next();

 private:
  std::ifstream in_;
  std::string path_;
  std::uint64_t file_size_ = 0;
  PcapHeader header_;
};

/// Convenience: every frame of a file.
std::vector<RawFrame> read_pcap(const std::string& path);

/// Re-serializes a record header plus payload using the byte order of
/// `header`. Together with `serialize_pcap_header` this reproduces the input.
Bytes serialize_pcap_record(const PcapHeader& header, const RawFrame& frame);
Bytes serialize_pcap_header(const PcapHeader& header);

/// Writes little-endian, microsecond-resolution, Ethernet pcap files.
class PcapWriter {
 public:
  explicit PcapWriter(const std::string& path, std::uint32_t snaplen = 65535);

  void write(std::int64_t timestamp_micros, ByteView frame);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
  PcapHeader header_;
};

struct DnsPacketRecord {
  std::int64_t timestamp_micros = 0;
  Ipv4Address client_addr;
  Ipv4Address server_addr;
  std::uint16_t client_port = 0;
  std::uint16_t transaction_id = 0;
  bool is_response = false;
  Bytes question_name;
  std::uint16_t question_type = rtype::A;
  std::vector<AnswerRecord> answers;
  /// Total Length field of the IPv4 header.
  std::uint32_t ip_packet_length = 0;

  bool operator==(const DnsPacketRecord&) const = default;
};

/// Why frames were passed over by `extract_dns_records`.
struct SkipStats {
  std::uint64_t not_ipv4 = 0;
  std::uint64_t not_udp = 0;
  std::uint64_t fragmented = 0;
  std::uint64_t not_dns_port = 0;
  std::uint64_t malformed = 0;
  std::uint64_t filtered = 0;

  std::uint64_t total() const {
    return not_ipv4 + not_udp + fragmented + not_dns_port + malformed + filtered;
  }
};

inline constexpr std::uint16_t kDnsPort = 53;

/// Decodes Ethernet/IPv4/UDP framing and the DNS payload. Returns nullopt for
/// anything that is not a parseable DNS-over-UDP/IPv4 datagram, counting the
/// reason in `stats` when given. Never throws on malformed input.
std::optional<DnsPacketRecord> extract_dns_records(const RawFrame& frame, SkipStats* stats = nullptr);

/// Ethernet/IPv4/UDP framing of a record, with valid IPv4 header and UDP
/// checksums. Queries travel client→server, responses server→client.
Bytes frame_dns_record(const DnsPacketRecord& record);

/// Ones-complement sum over 16-bit words, folded, not inverted.
std::uint16_t ones_complement_sum(ByteView data, std::uint32_t initial = 0);

}  // namespace dnsveil
