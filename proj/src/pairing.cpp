#include "dnsveil/pairing.hpp"

#include <deque>
#include <map>

namespace dnsveil {

PairKey PairKey::of(const DnsPacketRecord& record) {
  return {record.client_addr, record.server_addr, record.client_port, record.transaction_id,
          record.question_name};
}

PairingResult pair_streams(const std::vector<DnsPacketRecord>& records, std::int64_t window_micros) {
  if (window_micros <= 0) throw PairingError(PairingErrorKind::BadWindow, "BadWindow", "window must be positive");

  PairingResult result;
  // Queries in input order; positions into result.pairs.
  std::map<PairKey, std::deque<std::size_t>> pending;
  std::int64_t last_ts = 0;
  bool first = true;

  for (const auto& rec : records) {
    if (!first && rec.timestamp_micros < last_ts) {
      throw PairingError(PairingErrorKind::UnsortedInput, "UnsortedInput",
                         "timestamp regresses from " + std::to_string(last_ts) + " to " +
                             std::to_string(rec.timestamp_micros));
    }
    first = false;
    last_ts = rec.timestamp_micros;

    if (!rec.is_response) {
      pending[PairKey::of(rec)].push_back(result.pairs.size());
      result.pairs.push_back({rec, std::nullopt, std::nullopt});
      continue;
    }

    auto it = pending.find(PairKey::of(rec));
    if (it == pending.end()) {
      result.orphan_responses.push_back(rec);
      continue;
    }
    auto& queue = it->second;
    // Timestamps only grow, so a query out of window now stays out of window.
    while (!queue.empty() &&
           rec.timestamp_micros - result.pairs[queue.front()].query.timestamp_micros > window_micros) {
      queue.pop_front();
    }
    if (queue.empty()) {
      pending.erase(it);
      result.orphan_responses.push_back(rec);
      continue;
    }
    auto& pair = result.pairs[queue.front()];
    queue.pop_front();
    if (queue.empty()) pending.erase(it);
    pair.pair_latency_micros = rec.timestamp_micros - pair.query.timestamp_micros;
    pair.response = rec;
  }
  return result;
}

}  // namespace dnsveil
