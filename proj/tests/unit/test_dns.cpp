#include <random>

#include "doctest.h"
#include "dnsveil/dns.hpp"
#include "fixtures.hpp"

using namespace dnsveil;
using fixture::ByteWriter;

namespace {

Bytes hex(const std::string& text) {
  Bytes out;
  std::string digits;
  for (char c : text) {
    if (c != ' ') digits.push_back(c);
  }
  for (std::size_t i = 0; i + 1 < digits.size(); i += 2) {
    out.push_back(static_cast<std::uint8_t>(std::stoi(digits.substr(i, 2), nullptr, 16)));
  }
  return out;
}

DnsErrorKind error_kind(const Bytes& payload) {
  try {
    parse_dns_datagram(payload);
  } catch (const DnsError& e) {
    return e.kind();
  }
  FAIL("expected a DnsError");
  return DnsErrorKind::Truncated;
}

}  // namespace

TEST_CASE("twelve zero bytes have no question") {
  CHECK(error_kind(Bytes(12, 0)) == DnsErrorKind::ZeroQuestions);
}

TEST_CASE("short header is truncated") { CHECK(error_kind(Bytes(11, 0)) == DnsErrorKind::Truncated); }

TEST_CASE("hand-encoded wikipedia query") {
  const auto payload =
      hex("aa aa 01 00 00 01 00 00 00 00 00 00 03 77 77 77 09 77 69 6b 69 70 65 64 69 61 03 6f 72 67 00 00 01 00 01");
  const auto m = parse_dns_datagram(payload);
  CHECK(m.transaction_id == 0xAAAA);
  CHECK_FALSE(m.is_response);
  CHECK(to_string(m.question_name) == "www.wikipedia.org");
  CHECK(m.question_type == rtype::A);
  CHECK(m.answers.empty());
  CHECK(encode_dns_message(m) == payload);
}

TEST_CASE("answer name given as pointer to offset 12") {
  ByteWriter w;
  w.be16(0x1234).be16(0x8180).be16(1).be16(1).be16(0).be16(0);
  w.name("t.example.com").be16(rtype::A).be16(1);
  w.be16(0xC00C).be16(rtype::A).be16(1).be32(60).be16(4).u8(10).u8(1).u8(2).u8(3);
  const auto m = parse_dns_datagram(w.bytes);
  CHECK(m.is_response);
  REQUIRE(m.answers.size() == 1);
  CHECK(m.answers[0].name == m.question_name);
  CHECK(m.answers[0].rdata_text == Bytes{10, 1, 2, 3});
}

TEST_CASE("pointer chains are followed and loops rejected") {
  SUBCASE("self pointer") {
    ByteWriter w;
    w.be16(1).be16(0x0100).be16(1).be16(0).be16(0).be16(0);
    w.be16(0xC00C).be16(1).be16(1);
    CHECK(error_kind(w.bytes) == DnsErrorKind::PointerLoop);
  }
  SUBCASE("forward pointer") {
    ByteWriter w;
    w.be16(1).be16(0x0100).be16(1).be16(0).be16(0).be16(0);
    w.be16(0xC010).be16(1).be16(1).name("a");
    CHECK(error_kind(w.bytes) == DnsErrorKind::PointerLoop);
  }
  SUBCASE("pointer into a later label") {
    ByteWriter w;
    w.be16(1).be16(0x8180).be16(1).be16(1).be16(0).be16(0);
    w.name("www.example.com").be16(rtype::A).be16(1);
    // "example.com" starts at offset 16.
    w.be16(0xC010).be16(rtype::A).be16(1).be32(60).be16(4).be32(0);
    const auto m = parse_dns_datagram(w.bytes);
    REQUIRE(m.answers.size() == 1);
    CHECK(to_string(m.answers[0].name) == "example.com");
  }
}

TEST_CASE("reserved label type is rejected") {
  ByteWriter w;
  w.be16(1).be16(0x0100).be16(1).be16(0).be16(0).be16(0);
  w.u8(0x40).u8(0).be16(1).be16(1);
  CHECK(error_kind(w.bytes) == DnsErrorKind::BadLabel);
}

TEST_CASE("rdata decoding by type") {
  ByteWriter w;
  w.be16(7).be16(0x8180).be16(1).be16(4).be16(0).be16(0);
  w.name("q.test").be16(rtype::TXT).be16(1);
  w.be16(0xC00C).be16(rtype::CNAME).be16(1).be32(60).be16(5).name("x.y");
  w.be16(0xC00C).be16(rtype::TXT).be16(1).be32(60).be16(6).u8(2).text("ab").u8(2).text("cd");
  w.be16(0xC00C).be16(rtype::MX).be16(1).be32(60).be16(7).be16(10).name("m.z");
  w.be16(0xC00C).be16(rtype::AAAA).be16(1).be32(60).be16(3).u8(1).u8(2).u8(3);
  const auto m = parse_dns_datagram(w.bytes);
  REQUIRE(m.answers.size() == 4);
  CHECK(to_string(m.answers[0].rdata_text) == "x.y");
  CHECK(to_string(m.answers[1].rdata_text) == "abcd");
  CHECK(to_string(m.answers[2].rdata_text) == "m.z");
  CHECK(m.answers[3].rdata_text == Bytes{1, 2, 3});
}

TEST_CASE("answer count larger than the data is truncated") {
  ByteWriter w;
  w.be16(7).be16(0x8180).be16(1).be16(2).be16(0).be16(0);
  w.name("q.test").be16(rtype::A).be16(1);
  w.be16(0xC00C).be16(rtype::A).be16(1).be32(60).be16(4).be32(0);
  CHECK(error_kind(w.bytes) == DnsErrorKind::Truncated);
}

TEST_CASE("encode then parse is the identity on generator-style messages") {
  DnsMessage m;
  m.transaction_id = 0xBEEF;
  m.is_response = true;
  m.question_name = to_bytes("abcdef0123.dnshax.se");
  m.question_type = rtype::TXT;
  m.answers.push_back({m.question_name, rtype::TXT, Bytes(600, 'a')});
  m.answers.push_back({to_bytes("other.name"), rtype::CNAME, to_bytes("c.d.e")});
  m.answers.push_back({m.question_name, rtype::MX, to_bytes("mail.example")});
  m.answers.push_back({m.question_name, rtype::A, Bytes{1, 2, 3, 4}});
  CHECK(parse_dns_datagram(encode_dns_message(m)) == m);
}

TEST_CASE("encoder refuses names it cannot represent") {
  DnsMessage m;
  m.question_name = Bytes(64, 'a');
  CHECK_THROWS_AS(encode_dns_message(m), DnsError);
  m.question_name = to_bytes("a..b");
  CHECK_THROWS_AS(encode_dns_message(m), DnsError);
}

TEST_CASE("random payloads never crash the parser") {
  std::mt19937_64 gen(99);
  for (int i = 0; i < 20000; ++i) {
    Bytes payload(gen() % 200);
    for (auto& b : payload) b = static_cast<std::uint8_t>(gen());
    if (payload.size() >= 6 && (i % 2 == 0)) {
      payload[4] = 0;
      payload[5] = 1;
    }
    try {
      (void)parse_dns_datagram(payload);
    } catch (const DnsError&) {
    }
  }
}
