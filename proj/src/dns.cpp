#include "dnsveil/dns.hpp"

#include <algorithm>
#include <string>

namespace dnsveil {

namespace {

constexpr std::size_t kHeaderSize = 12;
constexpr int kMaxPointerHops = 128;

[[noreturn]] void fail(DnsErrorKind kind, const std::string& message) {
  static constexpr const char* kCodes[] = {"Truncated", "PointerLoop", "ZeroQuestions", "BadLabel",
                                           "Unencodable"};
  throw DnsError(kind, kCodes[static_cast<int>(kind)], message);
}

class WireReader {
 public:
  explicit WireReader(ByteView data) : data_(data) {}

  std::size_t offset() const { return offset_; }
  void seek(std::size_t offset) { offset_ = offset; }

  void require(std::size_t n, const char* what) const {
    if (offset_ > data_.size() || data_.size() - offset_ < n) {
      fail(DnsErrorKind::Truncated, std::string("payload ends inside ") + what);
    }
  }

  std::uint8_t u8(const char* what) {
    require(1, what);
    return data_[offset_++];
  }

  std::uint16_t u16(const char* what) {
    require(2, what);
    const auto v = static_cast<std::uint16_t>((data_[offset_] << 8) | data_[offset_ + 1]);
    offset_ += 2;
    return v;
  }

  std::uint32_t u32(const char* what) {
    const std::uint32_t hi = u16(what);
    return (hi << 16) | u16(what);
  }

  ByteView take(std::size_t n, const char* what) {
    require(n, what);
    auto view = data_.subspan(offset_, n);
    offset_ += n;
    return view;
  }

  /// Reads a possibly compressed name starting at the cursor. The cursor ends
  /// just past the name as it appears in place (after the first pointer).
  Bytes name() {
    Bytes out;
    std::size_t pos = offset_;
    std::size_t resume = 0;
    bool jumped = false;
    int hops = 0;
    while (true) {
      if (pos >= data_.size()) fail(DnsErrorKind::Truncated, "payload ends inside a name");
      const std::uint8_t len = data_[pos];
      if ((len & 0xC0) == 0xC0) {
        if (pos + 1 >= data_.size()) fail(DnsErrorKind::Truncated, "payload ends inside a pointer");
        const std::size_t target = (static_cast<std::size_t>(len & 0x3F) << 8) | data_[pos + 1];
        if (target >= pos) fail(DnsErrorKind::PointerLoop, "compression pointer does not point backward");
        if (++hops > kMaxPointerHops) fail(DnsErrorKind::PointerLoop, "compression pointer chain too long");
        if (!jumped) {
          resume = pos + 2;
          jumped = true;
        }
        pos = target;
        continue;
      }
      if ((len & 0xC0) != 0) fail(DnsErrorKind::BadLabel, "reserved label type");
      if (len == 0) {
        offset_ = jumped ? resume : pos + 1;
        return out;
      }
      if (pos + 1 + len > data_.size()) fail(DnsErrorKind::Truncated, "payload ends inside a label");
      if (!out.empty()) out.push_back('.');
      out.insert(out.end(), data_.begin() + static_cast<std::ptrdiff_t>(pos + 1),
                 data_.begin() + static_cast<std::ptrdiff_t>(pos + 1 + len));
      if (out.size() > kMaxNameLength) fail(DnsErrorKind::BadLabel, "name longer than 255 bytes");
      pos += 1 + len;
    }
  }

 private:
  ByteView data_;
  std::size_t offset_ = 0;
};

Bytes decode_rdata(WireReader& reader, std::uint16_t type, std::size_t rdlength) {
  const std::size_t start = reader.offset();
  reader.require(rdlength, "rdata");
  const std::size_t end = start + rdlength;
  Bytes text;
  switch (type) {
    case rtype::CNAME:
    case rtype::NS:
      text = reader.name();
      break;
    case rtype::MX:
      reader.u16("MX preference");
      text = reader.name();
      break;
    case rtype::TXT:
      while (reader.offset() < end) {
        const std::uint8_t n = reader.u8("TXT length");
        if (reader.offset() + n > end) fail(DnsErrorKind::Truncated, "TXT string overruns rdata");
        const auto chunk = reader.take(n, "TXT string");
        text.insert(text.end(), chunk.begin(), chunk.end());
      }
      break;
    default:
      break;
  }
  if (reader.offset() > end) fail(DnsErrorKind::Truncated, "rdata name overruns rdlength");
  reader.seek(start);
  const auto raw = reader.take(rdlength, "rdata");
  if (text.empty()) text.assign(raw.begin(), raw.end());
  return text;
}

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

void put_name(Bytes& out, ByteView name) {
  if (name.size() > kMaxNameLength) fail(DnsErrorKind::Unencodable, "name longer than 255 bytes");
  std::size_t start = 0;
  while (start < name.size()) {
    std::size_t stop = start;
    while (stop < name.size() && name[stop] != '.') ++stop;
    const std::size_t len = stop - start;
    if (len == 0 || len > kMaxLabelLength) fail(DnsErrorKind::Unencodable, "label must be 1-63 bytes");
    out.push_back(static_cast<std::uint8_t>(len));
    out.insert(out.end(), name.begin() + static_cast<std::ptrdiff_t>(start),
               name.begin() + static_cast<std::ptrdiff_t>(stop));
    start = stop + 1;
    if (stop + 1 == name.size()) fail(DnsErrorKind::Unencodable, "trailing dot");
  }
  out.push_back(0);
}

}  // namespace

DnsMessage parse_dns_datagram(ByteView payload) {
  WireReader reader(payload);
  reader.require(kHeaderSize, "header");
  DnsMessage msg;
  msg.transaction_id = reader.u16("header");
  const std::uint16_t flags = reader.u16("header");
  msg.is_response = (flags & 0x8000) != 0;
  const std::uint16_t qdcount = reader.u16("header");
  const std::uint16_t ancount = reader.u16("header");
  reader.u16("header");
  reader.u16("header");
  if (qdcount == 0) fail(DnsErrorKind::ZeroQuestions, "message carries no question");

  msg.question_name = reader.name();
  msg.question_type = reader.u16("question");
  reader.u16("question");
  // Further questions are skipped; only the first is featurized.
  for (std::uint16_t q = 1; q < qdcount; ++q) {
    reader.name();
    reader.u32("question");
  }

  msg.answers.reserve(ancount);
  for (std::uint16_t a = 0; a < ancount; ++a) {
    AnswerRecord rec;
    rec.name = reader.name();
    rec.rtype = reader.u16("answer");
    reader.u16("answer");
    reader.u32("answer");
    const std::uint16_t rdlength = reader.u16("answer");
    rec.rdata_text = decode_rdata(reader, rec.rtype, rdlength);
    msg.answers.push_back(std::move(rec));
  }
  return msg;
}

Bytes encode_dns_message(const DnsMessage& message) {
  if (message.answers.size() > 0xFFFF) fail(DnsErrorKind::Unencodable, "too many answers");
  Bytes out;
  out.reserve(64);
  put16(out, message.transaction_id);
  put16(out, message.is_response ? 0x8180 : 0x0100);
  put16(out, 1);
  put16(out, static_cast<std::uint16_t>(message.answers.size()));
  put16(out, 0);
  put16(out, 0);
  put_name(out, message.question_name);
  put16(out, message.question_type);
  put16(out, 1);

  for (const auto& answer : message.answers) {
    if (answer.name == message.question_name) {
      put16(out, 0xC00C);
    } else {
      put_name(out, answer.name);
    }
    put16(out, answer.rtype);
    put16(out, 1);
    put16(out, 0);
    put16(out, 60);
    Bytes rdata;
    switch (answer.rtype) {
      case rtype::CNAME:
      case rtype::NS:
        put_name(rdata, answer.rdata_text);
        break;
      case rtype::MX:
        put16(rdata, 10);
        put_name(rdata, answer.rdata_text);
        break;
      case rtype::TXT:
        for (std::size_t i = 0; i < answer.rdata_text.size(); i += 255) {
          const std::size_t n = std::min<std::size_t>(255, answer.rdata_text.size() - i);
          rdata.push_back(static_cast<std::uint8_t>(n));
          rdata.insert(rdata.end(), answer.rdata_text.begin() + static_cast<std::ptrdiff_t>(i),
                       answer.rdata_text.begin() + static_cast<std::ptrdiff_t>(i + n));
        }
        break;
      default:
        rdata = answer.rdata_text;
        break;
    }
    if (rdata.size() > 0xFFFF) fail(DnsErrorKind::Unencodable, "rdata longer than 65535 bytes");
    put16(out, static_cast<std::uint16_t>(rdata.size()));
    out.insert(out.end(), rdata.begin(), rdata.end());
  }
  return out;
}

Bytes to_bytes(std::string_view text) { return Bytes(text.begin(), text.end()); }

std::string to_string(ByteView bytes) { return std::string(bytes.begin(), bytes.end()); }

}  // namespace dnsveil
