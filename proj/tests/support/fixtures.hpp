#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "dnsveil/capture.hpp"

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("dnsveil_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// Little byte builder for hand-made packets and files.
struct ByteWriter {
  std::vector<std::uint8_t> bytes;

  ByteWriter& u8(std::uint32_t v) {
    bytes.push_back(static_cast<std::uint8_t>(v));
    return *this;
  }
  ByteWriter& be16(std::uint32_t v) { return u8(v >> 8).u8(v); }
  ByteWriter& be32(std::uint32_t v) { return be16(v >> 16).be16(v); }
  ByteWriter& le16(std::uint32_t v) { return u8(v).u8(v >> 8); }
  ByteWriter& le32(std::uint32_t v) { return le16(v).le16(v >> 16); }
  ByteWriter& raw(const std::vector<std::uint8_t>& v) {
    bytes.insert(bytes.end(), v.begin(), v.end());
    return *this;
  }
  ByteWriter& text(const std::string& s) {
    bytes.insert(bytes.end(), s.begin(), s.end());
    return *this;
  }
  /// Uncompressed wire name from dotted text.
  ByteWriter& name(const std::string& dotted) {
    std::size_t start = 0;
    while (start < dotted.size()) {
      auto dot = dotted.find('.', start);
      if (dot == std::string::npos) dot = dotted.size();
      u8(static_cast<std::uint32_t>(dot - start));
      text(dotted.substr(start, dot - start));
      start = dot + 1;
    }
    return u8(0);
  }
};

inline void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Classic little-endian microsecond pcap global header.
inline ByteWriter pcap_header(std::uint32_t linktype = 1) {
  ByteWriter w;
  w.le32(0xA1B2C3D4).le16(2).le16(4).le32(0).le32(0).le32(65535).le32(linktype);
  return w;
}

/// Ethernet + IPv4 + UDP around a payload, checksums left zero.
inline std::vector<std::uint8_t> udp_frame(std::uint32_t src, std::uint32_t dst, std::uint16_t sport,
                                           std::uint16_t dport, const std::vector<std::uint8_t>& payload,
                                           std::uint16_t flags_fragment = 0x4000) {
  ByteWriter w;
  for (int i = 0; i < 12; ++i) w.u8(0x02);
  w.be16(0x0800);
  const std::uint32_t total = 20 + 8 + static_cast<std::uint32_t>(payload.size());
  w.u8(0x45).u8(0).be16(total).be16(1).be16(flags_fragment).u8(64).u8(17).be16(0).be32(src).be32(dst);
  w.be16(sport).be16(dport).be16(8 + static_cast<std::uint32_t>(payload.size())).be16(0);
  w.raw(payload);
  return w.bytes;
}

inline std::uint32_t ip(std::uint8_t a, std::uint8_t b, std::uint8_t c, std::uint8_t d) {
  return dnsveil::Ipv4Address::from_octets(a, b, c, d).value;
}

}  // namespace fixture
