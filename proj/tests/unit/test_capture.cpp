#include <random>

#include "doctest.h"
#include "dnsveil/capture.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dnsveil;
using fixture::ByteWriter;

namespace {

CaptureErrorKind capture_error(const std::string& path) {
  try {
    (void)read_pcap(path);
  } catch (const CaptureError& e) {
    return e.kind();
  }
  FAIL("expected a CaptureError");
  return CaptureErrorKind::IoError;
}

Bytes query_payload(const std::string& name, std::uint16_t id = 0x1111) {
  DnsMessage m;
  m.transaction_id = id;
  m.question_name = to_bytes(name);
  return encode_dns_message(m);
}

RawFrame frame_of(const Bytes& bytes) {
  RawFrame f;
  f.captured_bytes = bytes;
  f.original_length = static_cast<std::uint32_t>(bytes.size());
  return f;
}

}  // namespace

TEST_CASE("empty capture yields no frames") {
  fixture::TempDir dir("cap");
  fixture::write_file(dir.file("e.pcap"), fixture::pcap_header().bytes);
  CHECK(read_pcap(dir.file("e.pcap")).empty());
}

TEST_CASE("pcapng magic is rejected") {
  fixture::TempDir dir("cap");
  ByteWriter w;
  w.le32(0x0A0D0D0A).le32(28).le32(0x1A2B3C4D).le32(0).le32(0).le32(0);
  fixture::write_file(dir.file("n.pcapng"), w.bytes);
  CHECK(capture_error(dir.file("n.pcapng")) == CaptureErrorKind::BadMagic);
}

TEST_CASE("non-ethernet link type is rejected") {
  fixture::TempDir dir("cap");
  fixture::write_file(dir.file("raw.pcap"), fixture::pcap_header(101).bytes);
  CHECK(capture_error(dir.file("raw.pcap")) == CaptureErrorKind::UnsupportedLinkType);
}

TEST_CASE("missing file is an io error") { CHECK(capture_error("/nonexistent/x.pcap") == CaptureErrorKind::IoError); }

TEST_CASE("single 60-byte frame with ts 1.000005") {
  fixture::TempDir dir("cap");
  auto w = fixture::pcap_header();
  w.le32(1).le32(5).le32(60).le32(60);
  for (int i = 0; i < 60; ++i) w.u8(static_cast<std::uint32_t>(i));
  fixture::write_file(dir.file("one.pcap"), w.bytes);
  const auto frames = read_pcap(dir.file("one.pcap"));
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].timestamp_micros == 1000005);
  CHECK(frames[0].original_length == 60);
  REQUIRE(frames[0].captured_bytes.size() == 60);
  CHECK(frames[0].captured_bytes[59] == 59);
}

TEST_CASE("cut-off record is a truncated frame") {
  fixture::TempDir dir("cap");
  auto w = fixture::pcap_header();
  w.le32(1).le32(5).le32(60).le32(60);
  for (int i = 0; i < 30; ++i) w.u8(0);
  fixture::write_file(dir.file("cut.pcap"), w.bytes);
  CHECK(capture_error(dir.file("cut.pcap")) == CaptureErrorKind::TruncatedFrame);
}

TEST_CASE("all four magics decode to the same timestamps") {
  fixture::TempDir dir("cap");
  struct Variant {
    std::uint32_t magic;
    bool big_endian;
    std::uint32_t fraction;
  };
  const Variant variants[] = {{0xA1B2C3D4, false, 5},
                              {0xA1B2C3D4, true, 5},
                              {0xA1B23C4D, false, 5000},
                              {0xA1B23C4D, true, 5000}};
  for (const auto& v : variants) {
    ByteWriter w;
    auto u32 = [&](std::uint32_t x) { v.big_endian ? w.be32(x) : w.le32(x); };
    auto u16 = [&](std::uint32_t x) { v.big_endian ? w.be16(x) : w.le16(x); };
    u32(v.magic);
    u16(2);
    u16(4);
    u32(0);
    u32(0);
    u32(65535);
    u32(1);
    u32(7);
    u32(v.fraction);
    u32(14);
    u32(14);
    for (int i = 0; i < 14; ++i) w.u8(0xAB);
    fixture::write_file(dir.file("v.pcap"), w.bytes);
    PcapReader reader(dir.file("v.pcap"));
    const auto frame = reader.next();
    REQUIRE(frame);
    CHECK(frame->timestamp_micros == 7000005);
    // Lossless at the record level.
    Bytes again = serialize_pcap_header(reader.header());
    const auto rec = serialize_pcap_record(reader.header(), *frame);
    again.insert(again.end(), rec.begin(), rec.end());
    CHECK(again == w.bytes);
  }
}

TEST_CASE("udp/53 query keeps the ipv4 total length") {
  const auto payload = query_payload("abc.example");
  const auto bytes = fixture::udp_frame(fixture::ip(192, 168, 1, 5), fixture::ip(10, 0, 0, 1), 40000, 53, payload);
  const auto total = 20 + 8 + payload.size();
  const auto rec = extract_dns_records(frame_of(bytes));
  REQUIRE(rec);
  CHECK(rec->ip_packet_length == total);
  CHECK(rec->client_addr == Ipv4Address::from_octets(192, 168, 1, 5));
  CHECK(rec->server_addr == Ipv4Address::from_octets(10, 0, 0, 1));
  CHECK(rec->client_port == 40000);
  CHECK_FALSE(rec->is_response);
  CHECK(to_string(rec->question_name) == "abc.example");
}

TEST_CASE("total length 62 is copied verbatim") {
  // 62 = 20 (IPv4) + 8 (UDP) + 34 bytes of DNS.
  const auto payload = query_payload("abcdefghijklmnop");
  REQUIRE(payload.size() == 34);
  const auto bytes = fixture::udp_frame(fixture::ip(192, 168, 1, 5), fixture::ip(10, 0, 0, 1), 40000, 53, payload);
  const auto rec = extract_dns_records(frame_of(bytes));
  REQUIRE(rec);
  CHECK(rec->ip_packet_length == 62);
}

TEST_CASE("responses name the destination as client") {
  DnsMessage m;
  m.transaction_id = 9;
  m.is_response = true;
  m.question_name = to_bytes("a.b");
  const auto bytes =
      fixture::udp_frame(fixture::ip(10, 0, 0, 1), fixture::ip(192, 168, 1, 5), 53, 40001, encode_dns_message(m));
  const auto rec = extract_dns_records(frame_of(bytes));
  REQUIRE(rec);
  CHECK(rec->is_response);
  CHECK(rec->client_addr == Ipv4Address::from_octets(192, 168, 1, 5));
  CHECK(rec->client_port == 40001);
}

TEST_CASE("frames that are not DNS over UDP/IPv4 are skipped") {
  SkipStats stats;
  const auto payload = query_payload("x.y");
  SUBCASE("arp") {
    ByteWriter w;
    for (int i = 0; i < 12; ++i) w.u8(0xFF);
    w.be16(0x0806);
    for (int i = 0; i < 28; ++i) w.u8(0);
    CHECK_FALSE(extract_dns_records(frame_of(w.bytes), &stats));
    CHECK(stats.not_ipv4 == 1);
  }
  SUBCASE("mdns port") {
    const auto bytes = fixture::udp_frame(fixture::ip(1, 1, 1, 1), fixture::ip(2, 2, 2, 2), 5353, 5353, payload);
    CHECK_FALSE(extract_dns_records(frame_of(bytes), &stats));
    CHECK(stats.not_dns_port == 1);
  }
  SUBCASE("fragment") {
    const auto bytes =
        fixture::udp_frame(fixture::ip(1, 1, 1, 1), fixture::ip(2, 2, 2, 2), 4000, 53, payload, 0x2000);
    CHECK_FALSE(extract_dns_records(frame_of(bytes), &stats));
    CHECK(stats.fragmented == 1);
  }
  SUBCASE("tcp") {
    auto bytes = fixture::udp_frame(fixture::ip(1, 1, 1, 1), fixture::ip(2, 2, 2, 2), 4000, 53, payload);
    bytes[14 + 9] = 6;
    CHECK_FALSE(extract_dns_records(frame_of(bytes), &stats));
    CHECK(stats.not_udp == 1);
  }
  SUBCASE("garbage dns") {
    const auto bytes =
        fixture::udp_frame(fixture::ip(1, 1, 1, 1), fixture::ip(2, 2, 2, 2), 4000, 53, Bytes(12, 0));
    CHECK_FALSE(extract_dns_records(frame_of(bytes), &stats));
    CHECK(stats.malformed == 1);
  }
  SUBCASE("vlan tagged frame is read") {
    auto bytes = fixture::udp_frame(fixture::ip(1, 1, 1, 1), fixture::ip(2, 2, 2, 2), 4000, 53, payload);
    const Bytes tag = {0x81, 0x00, 0x00, 0x05};
    bytes.insert(bytes.begin() + 12, tag.begin(), tag.end());
    CHECK(extract_dns_records(frame_of(bytes), &stats));
    CHECK(stats.total() == 0);
  }
}

TEST_CASE("random frames never crash extraction") {
  std::mt19937_64 gen(5);
  const auto payload = query_payload("seed.example");
  const auto base = fixture::udp_frame(fixture::ip(1, 1, 1, 1), fixture::ip(2, 2, 2, 2), 4000, 53, payload);
  for (int i = 0; i < 20000; ++i) {
    Bytes bytes;
    if (i % 2 == 0) {
      bytes.resize(gen() % 120);
      for (auto& b : bytes) b = static_cast<std::uint8_t>(gen());
    } else {
      bytes = base;
      const int flips = 1 + static_cast<int>(gen() % 6);
      for (int f = 0; f < flips; ++f) bytes[gen() % bytes.size()] = static_cast<std::uint8_t>(gen());
      bytes.resize(gen() % (bytes.size() + 1));
    }
    SkipStats stats;
    const auto rec = extract_dns_records(frame_of(bytes), &stats);
    CHECK((rec.has_value() || stats.total() == 1));
  }
}

TEST_CASE("framed records carry valid checksums and parse back") {
  DnsPacketRecord r;
  r.timestamp_micros = 5;
  r.client_addr = Ipv4Address::from_octets(192, 168, 2, 11);
  r.server_addr = Ipv4Address::from_octets(10, 0, 0, 1);
  r.client_port = 51000;
  r.transaction_id = 0x4242;
  r.question_name = to_bytes("abc.dnshax.se");
  r.question_type = rtype::TXT;
  for (bool response : {false, true}) {
    r.is_response = response;
    r.answers.clear();
    if (response) r.answers.push_back({r.question_name, rtype::TXT, to_bytes("0a0b0c")});
    const auto bytes = frame_dns_record(r);
    CHECK(oracle::udp_checksum_valid(bytes));
    CHECK(oracle::ipv4_header_checksum_valid(bytes));
    RawFrame f = frame_of(bytes);
    f.timestamp_micros = r.timestamp_micros;
    const auto back = extract_dns_records(f);
    REQUIRE(back);
    r.ip_packet_length = static_cast<std::uint32_t>(bytes.size() - 14);
    CHECK(*back == r);
  }
}

TEST_CASE("cidr parsing and membership") {
  const auto net = Ipv4Network::parse("192.168.2.0/24");
  CHECK(net.contains(Ipv4Address::from_octets(192, 168, 2, 200)));
  CHECK_FALSE(net.contains(Ipv4Address::from_octets(192, 168, 3, 1)));
  CHECK(Ipv4Network::parse("0.0.0.0/0").contains(Ipv4Address::from_octets(8, 8, 8, 8)));
  CHECK(Ipv4Network::parse("10.0.0.1").contains(Ipv4Address::from_octets(10, 0, 0, 1)));
  CHECK_THROWS(Ipv4Network::parse("10.0.0.0/33"));
  CHECK_THROWS(Ipv4Network::parse("300.0.0.0/8"));
  CHECK(Ipv4Address::from_octets(192, 168, 2, 11).to_string() == "192.168.2.11");
}
