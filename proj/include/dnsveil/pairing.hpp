#pragma once

#include <optional>
#include <vector>

#include "dnsveil/capture.hpp"

namespace dnsveil {

/// Records with equal keys and opposite directions are candidates for pairing.
struct PairKey {
  Ipv4Address client_addr;
  Ipv4Address server_addr;
  std::uint16_t client_port = 0;
  std::uint16_t transaction_id = 0;
  Bytes question_name;

  static PairKey of(const DnsPacketRecord& record);

  auto operator<=>(const PairKey&) const = default;
};

struct QueryResponsePair {
  DnsPacketRecord query;
  std::optional<DnsPacketRecord> response;
  std::optional<std::int64_t> pair_latency_micros;

  bool operator==(const QueryResponsePair&) const = default;
};

struct PairingResult {
  std::vector<QueryResponsePair> pairs;
  std::vector<DnsPacketRecord> orphan_responses;
};

inline constexpr std::int64_t kDefaultPairWindowMicros = 5'000'000;

enum class PairingErrorKind { UnsortedInput, BadWindow };
using PairingError = KindedError<PairingErrorKind>;

/// FIFO matching: each response attaches to the earliest still-unmatched
/// query with the same key that was seen no more than `window_micros` before
/// it. Pairs come out in query order; orphans in input order.
PairingResult pair_streams(const std::vector<DnsPacketRecord>& records,
                           std::int64_t window_micros = kDefaultPairWindowMicros);

}  // namespace dnsveil
