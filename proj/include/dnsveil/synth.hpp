#pragma once

#include <array>
#include <string>
#include <vector>

#include "dnsveil/features.hpp"

namespace dnsveil {

/// Which record types carry downstream tunnel data.
struct AnswerTypeMix {
  double txt = 0.6;
  double cname = 0.2;
  double mx = 0.2;
};

struct SynthConfig {
  TrafficClass cls = TrafficClass::Normal;
  int pair_count = 1000;
  std::string tunnel_domain = "dnshax.se";
  std::uint64_t seed = 1;
  /// Fraction of queries left without a response.
  double response_loss_rate = 0.02;
  AnswerTypeMix answer_rtype_mix;
  /// Timestamp of the first query.
  std::int64_t start_micros = 1'600'000'000'000'000;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

inline constexpr std::int64_t kQueryCadenceMicros = 10'000;

/// The built-in lowercase word list used for benign names (1000 entries).
const std::vector<std::string>& dictionary_words();

/// Benign lookups: `<word>[.<word>].<tld>` with Zipf(1.1) word popularity,
/// each answered by a single A record.
std::vector<QueryResponsePair> gen_normal_pairs(const SynthConfig& config);

/// Tunnel sessions that hex-encode a small framing header plus payload into
/// query labels under the tunnel domain and into TXT/CNAME/MX answers. The
/// payload size profile depends on the tunneled protocol.
std::vector<QueryResponsePair> gen_tunnel_pairs(const SynthConfig& config);

/// Dispatches on config.cls.
std::vector<QueryResponsePair> generate_pairs(const SynthConfig& config);

/// Every record of `pairs` as an Ethernet frame, in timestamp order.
void write_pcap(const std::vector<QueryResponsePair>& pairs, const std::string& path);

/// Lowercase hex of `data`, split into DNS labels of at most 63 characters.
std::string hex_labels(ByteView data);

}  // namespace dnsveil
