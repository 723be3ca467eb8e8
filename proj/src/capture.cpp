#include "dnsveil/capture.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <sstream>

namespace dnsveil {

namespace {

constexpr std::size_t kGlobalHeaderSize = 24;
constexpr std::size_t kRecordHeaderSize = 16;
constexpr std::size_t kEthernetHeaderSize = 14;
constexpr std::uint16_t kEtherTypeIpv4 = 0x0800;
constexpr std::uint16_t kEtherTypeVlan = 0x8100;
constexpr std::uint8_t kProtoUdp = 17;

[[noreturn]] void fail(CaptureErrorKind kind, const std::string& message) {
  static constexpr const char* kCodes[] = {"BadMagic", "UnsupportedLinkType", "TruncatedFrame", "IoError"};
  throw CaptureError(kind, kCodes[static_cast<int>(kind)], message);
}

std::uint16_t be16(const std::uint8_t* p) { return static_cast<std::uint16_t>((p[0] << 8) | p[1]); }

std::uint32_t be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

std::uint32_t le32(const std::uint8_t* p) {
  return (std::uint32_t{p[3]} << 24) | (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[1]} << 8) | p[0];
}

class FieldCodec {
 public:
  explicit FieldCodec(bool big_endian) : big_(big_endian) {}

  std::uint32_t u32(const std::uint8_t* p) const { return big_ ? be32(p) : le32(p); }
  std::uint16_t u16(const std::uint8_t* p) const {
    return big_ ? be16(p) : static_cast<std::uint16_t>((p[1] << 8) | p[0]);
  }

  void put32(Bytes& out, std::uint32_t v) const {
    for (int i = 0; i < 4; ++i) {
      const int shift = big_ ? 24 - 8 * i : 8 * i;
      out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
    }
  }
  void put16(Bytes& out, std::uint16_t v) const {
    for (int i = 0; i < 2; ++i) {
      const int shift = big_ ? 8 - 8 * i : 8 * i;
      out.push_back(static_cast<std::uint8_t>((v >> shift) & 0xFF));
    }
  }

 private:
  bool big_;
};

void put_be16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_be32(Bytes& out, std::uint32_t v) {
  put_be16(out, static_cast<std::uint16_t>(v >> 16));
  put_be16(out, static_cast<std::uint16_t>(v & 0xFFFF));
}

void put_mac(Bytes& out, Ipv4Address addr) {
  out.insert(out.end(), {0x02, 0x00});
  put_be32(out, addr.value);
}

}  // namespace

std::string Ipv4Address::to_string() const {
  std::ostringstream os;
  os << (value >> 24) << '.' << ((value >> 16) & 0xFF) << '.' << ((value >> 8) & 0xFF) << '.'
     << (value & 0xFF);
  return os.str();
}

Ipv4Network Ipv4Network::parse(const std::string& cidr) {
  const auto slash = cidr.find('/');
  const std::string addr_part = cidr.substr(0, slash);
  int prefix = 32;
  if (slash != std::string::npos) {
    try {
      std::size_t used = 0;
      prefix = std::stoi(cidr.substr(slash + 1), &used);
      if (used != cidr.size() - slash - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument("bad CIDR prefix: " + cidr);
    }
  }
  if (prefix < 0 || prefix > 32) throw std::invalid_argument("bad CIDR prefix: " + cidr);
  std::uint32_t value = 0;
  int octets = 0;
  std::istringstream in(addr_part);
  std::string part;
  while (std::getline(in, part, '.')) {
    if (part.empty() || part.size() > 3 || !std::all_of(part.begin(), part.end(), ::isdigit)) {
      throw std::invalid_argument("bad IPv4 address: " + cidr);
    }
    const int octet = std::stoi(part);
    if (octet > 255) throw std::invalid_argument("bad IPv4 address: " + cidr);
    value = (value << 8) | static_cast<std::uint32_t>(octet);
    ++octets;
  }
  if (octets != 4) throw std::invalid_argument("bad IPv4 address: " + cidr);
  return {{value}, prefix};
}

bool Ipv4Network::contains(Ipv4Address addr) const {
  if (prefix == 0) return true;
  const std::uint32_t mask = prefix == 32 ? 0xFFFFFFFFu : ~((1u << (32 - prefix)) - 1);
  return (addr.value & mask) == (base.value & mask);
}

PcapReader::PcapReader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
  if (!in_) fail(CaptureErrorKind::IoError, "cannot open " + path);
  std::error_code ec;
  file_size_ = std::filesystem::file_size(path, ec);
  if (ec) fail(CaptureErrorKind::IoError, "cannot stat " + path);
  std::array<std::uint8_t, kGlobalHeaderSize> raw{};
  in_.read(reinterpret_cast<char*>(raw.data()), raw.size());
  if (in_.gcount() < 4) fail(CaptureErrorKind::BadMagic, path + " is too short to be a pcap file");

  const std::uint32_t as_big = be32(raw.data());
  switch (as_big) {
    case 0xA1B2C3D4: header_.swapped = true; header_.nanosecond = false; break;
    case 0xD4C3B2A1: header_.swapped = false; header_.nanosecond = false; break;
    case 0xA1B23C4D: header_.swapped = true; header_.nanosecond = true; break;
    case 0x4D3CB2A1: header_.swapped = false; header_.nanosecond = true; break;
    case 0x0A0D0D0A:
      fail(CaptureErrorKind::BadMagic, path + " is a pcapng file; only classic pcap is supported");
    default:
      fail(CaptureErrorKind::BadMagic, path + " is not a pcap file");
  }
  if (static_cast<std::size_t>(in_.gcount()) < kGlobalHeaderSize) {
    fail(CaptureErrorKind::TruncatedFrame, path + " ends inside the global header");
  }
  const FieldCodec codec(header_.swapped);
  header_.magic = codec.u32(raw.data());
  header_.version_major = codec.u16(raw.data() + 4);
  header_.version_minor = codec.u16(raw.data() + 6);
  header_.thiszone = static_cast<std::int32_t>(codec.u32(raw.data() + 8));
  header_.sigfigs = codec.u32(raw.data() + 12);
  header_.snaplen = codec.u32(raw.data() + 16);
  header_.linktype = codec.u32(raw.data() + 20);
  if (header_.linktype != kLinkTypeEthernet) {
    fail(CaptureErrorKind::UnsupportedLinkType,
         path + " has link type " + std::to_string(header_.linktype) + "; only Ethernet (1) is supported");
  }
}

std::optional<RawFrame> PcapReader::next() {
  std::array<std::uint8_t, kRecordHeaderSize> raw{};
  in_.read(reinterpret_cast<char*>(raw.data()), raw.size());
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got == 0) return std::nullopt;
  if (got < kRecordHeaderSize) fail(CaptureErrorKind::TruncatedFrame, path_ + " ends inside a record header");

  const FieldCodec codec(header_.swapped);
  RawFrame frame;
  frame.ts_seconds = codec.u32(raw.data());
  frame.ts_fraction = codec.u32(raw.data() + 4);
  const std::uint32_t incl_len = codec.u32(raw.data() + 8);
  frame.original_length = codec.u32(raw.data() + 12);
  if (incl_len > frame.original_length) {
    fail(CaptureErrorKind::TruncatedFrame, path_ + " has a record with incl_len > orig_len");
  }

  const auto here = static_cast<std::uint64_t>(in_.tellg());
  if (file_size_ < here || file_size_ - here < incl_len) {
    fail(CaptureErrorKind::TruncatedFrame, path_ + " record promises more bytes than remain");
  }
  frame.captured_bytes.resize(incl_len);
  in_.read(reinterpret_cast<char*>(frame.captured_bytes.data()), incl_len);

  const std::int64_t micros = header_.nanosecond ? frame.ts_fraction / 1000 : frame.ts_fraction;
  frame.timestamp_micros = static_cast<std::int64_t>(frame.ts_seconds) * 1'000'000 + micros;
  return frame;
}

std::vector<RawFrame> read_pcap(const std::string& path) {
  PcapReader reader(path);
  std::vector<RawFrame> frames;
  while (auto frame = reader.next()) frames.push_back(std::move(*frame));
  return frames;
}

Bytes serialize_pcap_header(const PcapHeader& header) {
  const FieldCodec codec(header.swapped);
  Bytes out;
  codec.put32(out, header.magic);
  codec.put16(out, header.version_major);
  codec.put16(out, header.version_minor);
  codec.put32(out, static_cast<std::uint32_t>(header.thiszone));
  codec.put32(out, header.sigfigs);
  codec.put32(out, header.snaplen);
  codec.put32(out, header.linktype);
  return out;
}

Bytes serialize_pcap_record(const PcapHeader& header, const RawFrame& frame) {
  const FieldCodec codec(header.swapped);
  Bytes out;
  out.reserve(kRecordHeaderSize + frame.captured_bytes.size());
  codec.put32(out, frame.ts_seconds);
  codec.put32(out, frame.ts_fraction);
  codec.put32(out, static_cast<std::uint32_t>(frame.captured_bytes.size()));
  codec.put32(out, frame.original_length);
  out.insert(out.end(), frame.captured_bytes.begin(), frame.captured_bytes.end());
  return out;
}

PcapWriter::PcapWriter(const std::string& path, std::uint32_t snaplen)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
  if (!out_) fail(CaptureErrorKind::IoError, "cannot create " + path);
  header_.snaplen = snaplen;
  const Bytes raw = serialize_pcap_header(header_);
  out_.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void PcapWriter::write(std::int64_t timestamp_micros, ByteView frame) {
  RawFrame record;
  record.ts_seconds = static_cast<std::uint32_t>(timestamp_micros / 1'000'000);
  record.ts_fraction = static_cast<std::uint32_t>(timestamp_micros % 1'000'000);
  record.original_length = static_cast<std::uint32_t>(frame.size());
  record.captured_bytes.assign(frame.begin(), frame.end());
  const Bytes raw = serialize_pcap_record(header_, record);
  out_.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out_) fail(CaptureErrorKind::IoError, "write failed on " + path_);
}

void PcapWriter::close() {
  out_.close();
  if (out_.fail()) fail(CaptureErrorKind::IoError, "close failed on " + path_);
}

std::uint16_t ones_complement_sum(ByteView data, std::uint32_t initial) {
  std::uint64_t sum = initial;
  std::size_t i = 0;
  for (; i + 1 < data.size(); i += 2) sum += be16(data.data() + i);
  if (i < data.size()) sum += static_cast<std::uint32_t>(data[i]) << 8;
  while (sum >> 16) sum = (sum & 0xFFFF) + (sum >> 16);
  return static_cast<std::uint16_t>(sum);
}

std::optional<DnsPacketRecord> extract_dns_records(const RawFrame& frame, SkipStats* stats) {
  SkipStats scratch;
  SkipStats& s = stats ? *stats : scratch;
  const auto& b = frame.captured_bytes;

  if (b.size() < kEthernetHeaderSize) {
    ++s.not_ipv4;
    return std::nullopt;
  }
  std::size_t off = 12;
  std::uint16_t ethertype = be16(b.data() + off);
  off += 2;
  if (ethertype == kEtherTypeVlan) {
    if (b.size() < off + 4) {
      ++s.not_ipv4;
      return std::nullopt;
    }
    ethertype = be16(b.data() + off + 2);
    off += 4;
  }
  if (ethertype != kEtherTypeIpv4 || b.size() < off + 20 || (b[off] >> 4) != 4) {
    ++s.not_ipv4;
    return std::nullopt;
  }

  const std::uint8_t* ip = b.data() + off;
  const std::size_t ihl = static_cast<std::size_t>(ip[0] & 0x0F) * 4;
  const std::uint16_t total_length = be16(ip + 2);
  const std::uint16_t frag = be16(ip + 6);
  if (ihl < 20 || b.size() < off + ihl) {
    ++s.malformed;
    return std::nullopt;
  }
  if (ip[9] != kProtoUdp) {
    ++s.not_udp;
    return std::nullopt;
  }
  if ((frag & 0x1FFF) != 0 || (frag & 0x2000) != 0) {
    ++s.fragmented;
    return std::nullopt;
  }
  if (total_length < ihl + 8 || b.size() < off + ihl + 8) {
    ++s.malformed;
    return std::nullopt;
  }

  const std::uint8_t* udp = ip + ihl;
  const std::uint16_t src_port = be16(udp);
  const std::uint16_t dst_port = be16(udp + 2);
  const std::uint16_t udp_length = be16(udp + 4);
  if ((src_port == kDnsPort) == (dst_port == kDnsPort)) {
    ++s.not_dns_port;
    return std::nullopt;
  }
  if (udp_length < 8) {
    ++s.malformed;
    return std::nullopt;
  }

  const std::size_t payload_off = off + ihl + 8;
  const std::size_t available = b.size() - payload_off;
  const std::size_t payload_len = std::min<std::size_t>(udp_length - 8u, available);

  DnsMessage msg;
  try {
    msg = parse_dns_datagram(ByteView(b.data() + payload_off, payload_len));
  } catch (const DnsError&) {
    ++s.malformed;
    return std::nullopt;
  }

  const Ipv4Address src{be32(ip + 12)};
  const Ipv4Address dst{be32(ip + 16)};
  const bool client_is_src = dst_port == kDnsPort;

  DnsPacketRecord rec;
  rec.timestamp_micros = frame.timestamp_micros;
  rec.client_addr = client_is_src ? src : dst;
  rec.server_addr = client_is_src ? dst : src;
  rec.client_port = client_is_src ? src_port : dst_port;
  rec.transaction_id = msg.transaction_id;
  rec.is_response = msg.is_response;
  rec.question_name = std::move(msg.question_name);
  rec.question_type = msg.question_type;
  rec.answers = std::move(msg.answers);
  rec.ip_packet_length = total_length;
  return rec;
}

Bytes frame_dns_record(const DnsPacketRecord& record) {
  DnsMessage msg;
  msg.transaction_id = record.transaction_id;
  msg.is_response = record.is_response;
  msg.question_name = record.question_name;
  msg.question_type = record.question_type;
  msg.answers = record.answers;
  const Bytes dns = encode_dns_message(msg);

  const Ipv4Address src = record.is_response ? record.server_addr : record.client_addr;
  const Ipv4Address dst = record.is_response ? record.client_addr : record.server_addr;
  const std::uint16_t src_port = record.is_response ? kDnsPort : record.client_port;
  const std::uint16_t dst_port = record.is_response ? record.client_port : kDnsPort;
  const auto udp_length = static_cast<std::uint16_t>(8 + dns.size());
  const auto total_length = static_cast<std::uint16_t>(20 + udp_length);

  Bytes out;
  out.reserve(kEthernetHeaderSize + total_length);
  put_mac(out, dst);
  put_mac(out, src);
  put_be16(out, kEtherTypeIpv4);

  const std::size_t ip_off = out.size();
  out.push_back(0x45);
  out.push_back(0x00);
  put_be16(out, total_length);
  put_be16(out, record.transaction_id);
  put_be16(out, 0x4000);  // DF
  out.push_back(64);
  out.push_back(kProtoUdp);
  put_be16(out, 0);
  put_be32(out, src.value);
  put_be32(out, dst.value);
  const std::uint16_t ip_sum = ~ones_complement_sum(ByteView(out.data() + ip_off, 20));
  out[ip_off + 10] = static_cast<std::uint8_t>(ip_sum >> 8);
  out[ip_off + 11] = static_cast<std::uint8_t>(ip_sum & 0xFF);

  const std::size_t udp_off = out.size();
  put_be16(out, src_port);
  put_be16(out, dst_port);
  put_be16(out, udp_length);
  put_be16(out, 0);
  out.insert(out.end(), dns.begin(), dns.end());

  Bytes pseudo;
  put_be32(pseudo, src.value);
  put_be32(pseudo, dst.value);
  put_be16(pseudo, kProtoUdp);
  put_be16(pseudo, udp_length);
  const std::uint16_t pseudo_sum = ones_complement_sum(pseudo);
  std::uint16_t udp_sum = ~ones_complement_sum(ByteView(out.data() + udp_off, udp_length), pseudo_sum);
  if (udp_sum == 0) udp_sum = 0xFFFF;
  out[udp_off + 6] = static_cast<std::uint8_t>(udp_sum >> 8);
  out[udp_off + 7] = static_cast<std::uint8_t>(udp_sum & 0xFF);
  return out;
}

}  // namespace dnsveil
