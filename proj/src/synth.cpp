#include "dnsveil/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "dnsveil/capture.hpp"
#include "dnsveil/rng.hpp"

namespace dnsveil {

namespace {

constexpr std::size_t kDictionarySize = 1000;
constexpr double kZipfExponent = 1.1;
constexpr std::size_t kTunnelHeaderBytes = 9;  // packet id, type, session, seq, ack

const Ipv4Address kResolver = Ipv4Address::from_octets(10, 0, 0, 1);

/// Cumulative Zipf weights over dictionary ranks.
const std::vector<double>& zipf_cdf() {
  static const std::vector<double> cdf = [] {
    std::vector<double> c(kDictionarySize);
    double total = 0.0;
    for (std::size_t r = 0; r < kDictionarySize; ++r) {
      total += 1.0 / std::pow(static_cast<double>(r + 1), kZipfExponent);
      c[r] = total;
    }
    for (auto& v : c) v /= total;
    return c;
  }();
  return cdf;
}

const std::string& zipf_word(Rng& rng) {
  const auto& cdf = zipf_cdf();
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  const auto rank = std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), kDictionarySize - 1);
  return dictionary_words()[rank];
}

struct TldChoice {
  const char* tld;
  double weight;
};

constexpr TldChoice kTlds[] = {{"com", 0.45}, {"org", 0.1}, {"net", 0.1}, {"se", 0.12}, {"io", 0.05},
                               {"de", 0.06}, {"uk", 0.04}, {"edu", 0.04}, {"info", 0.04}};

std::string pick_tld(Rng& rng) {
  std::vector<double> weights;
  for (const auto& t : kTlds) weights.push_back(t.weight);
  return kTlds[rng.weighted(weights)].tld;
}

Bytes random_bytes(Rng& rng, std::size_t n) {
  Bytes out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(rng.below(256));
  return out;
}

std::uint32_t ip_length_of(const DnsPacketRecord& rec) {
  DnsMessage msg{rec.transaction_id, rec.is_response, rec.question_name, rec.question_type, rec.answers};
  return static_cast<std::uint32_t>(20 + 8 + encode_dns_message(msg).size());
}

std::size_t dns_length_of(const DnsPacketRecord& rec) { return ip_length_of(rec) - 28; }

/// Payload-size ranges (bytes before hex encoding) per tunneled protocol.
struct Profile {
  std::size_t query_min, query_max;
  std::size_t response_min, response_max;
  /// Probability that a direction carries no payload, drawn per direction.
  double idle_poll;
};

Profile profile_for(TrafficClass cls) {
  switch (cls) {
    case TrafficClass::SshTunnel: return {16, 64, 16, 64, 0.05};       // interactive, symmetric
    case TrafficClass::SftpTunnel: return {0, 8, 150, 230, 0.02};      // bulk download, acks upstream
    case TrafficClass::TelnetTunnel: return {0, 12, 0, 24, 0.25};      // short keystroke bursts
    case TrafficClass::Normal: break;
  }
  throw std::invalid_argument("no tunnel profile for the normal class");
}

Bytes tunnel_header(std::uint16_t packet_id, std::uint8_t type, std::uint16_t session, std::uint16_t seq,
                    std::uint16_t ack) {
  return {static_cast<std::uint8_t>(packet_id >> 8), static_cast<std::uint8_t>(packet_id), type,
          static_cast<std::uint8_t>(session >> 8),   static_cast<std::uint8_t>(session),   static_cast<std::uint8_t>(seq >> 8),
          static_cast<std::uint8_t>(seq),            static_cast<std::uint8_t>(ack >> 8),  static_cast<std::uint8_t>(ack)};
}

Bytes under_domain(const Bytes& data, const std::string& domain) {
  std::string name = hex_labels(data);
  name += '.';
  name += domain;
  return to_bytes(name);
}

std::string to_hex(ByteView data) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(data.size() * 2);
  for (std::uint8_t b : data) {
    out += kHex[b >> 4];
    out += kHex[b & 0x0F];
  }
  return out;
}

std::int64_t response_delay(Rng& rng) { return rng.between(1'000, 50'000); }

}  // namespace

void SynthConfig::validate() const {
  if (pair_count < 1) throw std::invalid_argument("pair_count must be at least 1");
  if (!(response_loss_rate >= 0.0 && response_loss_rate < 1.0)) {
    throw std::invalid_argument("response_loss_rate must lie in [0, 1)");
  }
  const double mix = answer_rtype_mix.txt + answer_rtype_mix.cname + answer_rtype_mix.mx;
  if (answer_rtype_mix.txt < 0 || answer_rtype_mix.cname < 0 || answer_rtype_mix.mx < 0 ||
      std::fabs(mix - 1.0) > 1e-9) {
    throw std::invalid_argument("answer_rtype_mix weights must be non-negative and sum to 1");
  }
  if (tunnel_domain.empty() || tunnel_domain.size() > 200) throw std::invalid_argument("bad tunnel domain");
  if (start_micros < 0) throw std::invalid_argument("start_micros must be non-negative");
}

const std::vector<std::string>& dictionary_words() {
  static const std::vector<std::string> words = [] {
    // Pronounceable consonant-vowel words from a fixed generator.
    static constexpr const char* kOnsets[] = {"b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p",
                                              "r", "s", "t", "v", "w", "z", "st", "tr", "br", "ch", "sh", "pl"};
    static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ea", "ou", "ai"};
    static constexpr const char* kCodas[] = {"", "", "", "n", "r", "s", "t", "l", "m", "ck", "ng", "x"};
    Rng rng(0x5EED'D1C7ULL);
    std::vector<std::string> out;
    std::set<std::string> seen;
    while (out.size() < kDictionarySize) {
      const auto syllables = 1 + rng.below(3);
      std::string w;
      for (std::uint64_t s = 0; s < syllables; ++s) {
        w += kOnsets[rng.below(std::size(kOnsets))];
        w += kVowels[rng.below(std::size(kVowels))];
      }
      w += kCodas[rng.below(std::size(kCodas))];
      if (w.size() < 2 || !seen.insert(w).second) continue;
      out.push_back(std::move(w));
    }
    return out;
  }();
  return words;
}

std::string hex_labels(ByteView data) {
  const std::string hex = to_hex(data);
  std::string out;
  for (std::size_t i = 0; i < hex.size(); i += kMaxLabelLength) {
    if (i > 0) out += '.';
    out.append(hex, i, kMaxLabelLength);
  }
  return out;
}

std::vector<QueryResponsePair> gen_normal_pairs(const SynthConfig& config) {
  config.validate();
  if (config.cls != TrafficClass::Normal) throw std::invalid_argument("gen_normal_pairs needs the normal class");
  Rng rng(config.seed);
  std::vector<QueryResponsePair> pairs;
  pairs.reserve(static_cast<std::size_t>(config.pair_count));
  for (int i = 0; i < config.pair_count; ++i) {
    DnsPacketRecord q;
    q.timestamp_micros = config.start_micros + static_cast<std::int64_t>(i) * kQueryCadenceMicros;
    q.client_addr = Ipv4Address::from_octets(192, 168, 1, static_cast<std::uint8_t>(10 + rng.below(50)));
    q.server_addr = kResolver;
    q.client_port = static_cast<std::uint16_t>(rng.between(1024, 65535));
    q.transaction_id = static_cast<std::uint16_t>(rng.below(65536));
    std::string name = zipf_word(rng);
    if (rng.chance(0.5)) name += "." + zipf_word(rng);
    name += "." + pick_tld(rng);
    q.question_name = to_bytes(name);
    q.question_type = rtype::A;
    q.ip_packet_length = ip_length_of(q);

    QueryResponsePair pair{q, std::nullopt, std::nullopt};
    const bool answered = !rng.chance(config.response_loss_rate);
    const std::int64_t delay = response_delay(rng);
    Bytes address = random_bytes(rng, 4);
    if (answered) {
      DnsPacketRecord r = q;
      r.is_response = true;
      r.timestamp_micros = q.timestamp_micros + delay;
      r.answers.push_back({q.question_name, rtype::A, std::move(address)});
      r.ip_packet_length = ip_length_of(r);
      pair.pair_latency_micros = delay;
      pair.response = std::move(r);
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<QueryResponsePair> gen_tunnel_pairs(const SynthConfig& config) {
  config.validate();
  const Profile profile = profile_for(config.cls);
  Rng rng(config.seed);
  const auto session = static_cast<std::uint16_t>(rng.below(65536));
  const auto client_port = static_cast<std::uint16_t>(rng.between(1024, 65535));
  const Ipv4Address client =
      Ipv4Address::from_octets(192, 168, 2, static_cast<std::uint8_t>(10 + class_index(config.cls)));
  const std::vector<double> mix = {config.answer_rtype_mix.txt, config.answer_rtype_mix.cname,
                                   config.answer_rtype_mix.mx};
  static constexpr std::uint16_t kTypes[] = {rtype::TXT, rtype::CNAME, rtype::MX};

  std::uint16_t seq = static_cast<std::uint16_t>(rng.below(65536));
  std::uint16_t ack = static_cast<std::uint16_t>(rng.below(65536));
  std::vector<QueryResponsePair> pairs;
  pairs.reserve(static_cast<std::size_t>(config.pair_count));
  for (int i = 0; i < config.pair_count; ++i) {
    const std::uint16_t type = kTypes[rng.weighted(mix)];
    const bool idle_up = rng.chance(profile.idle_poll);
    const bool idle_down = rng.chance(profile.idle_poll);
    std::size_t up = idle_up ? 0 : rng.between(profile.query_min, profile.query_max);
    std::size_t down = idle_down ? 0 : rng.between(profile.response_min, profile.response_max);

    DnsPacketRecord q;
    q.timestamp_micros = config.start_micros + static_cast<std::int64_t>(i) * kQueryCadenceMicros;
    q.client_addr = client;
    q.server_addr = kResolver;
    q.client_port = client_port;
    q.transaction_id = static_cast<std::uint16_t>(rng.below(65536));
    q.question_type = type;
    const Bytes up_payload = random_bytes(rng, up);
    const Bytes q_header = tunnel_header(static_cast<std::uint16_t>(rng.below(65536)), 0x01, session, seq, ack);
    // Shrink the upstream chunk until the name fits in 255 bytes.
    while (true) {
      Bytes data = q_header;
      data.insert(data.end(), up_payload.begin(), up_payload.begin() + static_cast<std::ptrdiff_t>(up));
      q.question_name = under_domain(data, config.tunnel_domain);
      if (q.question_name.size() <= kMaxNameLength) break;
      --up;
    }
    q.ip_packet_length = ip_length_of(q);
    seq = static_cast<std::uint16_t>(seq + up);

    QueryResponsePair pair{q, std::nullopt, std::nullopt};
    const bool answered = !rng.chance(config.response_loss_rate);
    const std::int64_t delay = response_delay(rng);
    const Bytes down_payload = random_bytes(rng, down);
    const Bytes r_header = tunnel_header(static_cast<std::uint16_t>(rng.below(65536)), 0x01, session, ack, seq);
    if (answered) {
      DnsPacketRecord r = q;
      r.is_response = true;
      r.timestamp_micros = q.timestamp_micros + delay;
      // Shrink the downstream chunk until the record and message fit.
      while (true) {
        Bytes data = r_header;
        data.insert(data.end(), down_payload.begin(), down_payload.begin() + static_cast<std::ptrdiff_t>(down));
        Bytes rdata = type == rtype::TXT ? to_bytes(to_hex(data)) : under_domain(data, config.tunnel_domain);
        r.answers = {{q.question_name, type, std::move(rdata)}};
        const bool name_ok = type == rtype::TXT || r.answers.front().rdata_text.size() <= kMaxNameLength;
        if (name_ok && dns_length_of(r) <= kMaxUdpDnsPayload) break;
        --down;
      }
      r.ip_packet_length = ip_length_of(r);
      ack = static_cast<std::uint16_t>(ack + down);
      pair.pair_latency_micros = delay;
      pair.response = std::move(r);
    }
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

std::vector<QueryResponsePair> generate_pairs(const SynthConfig& config) {
  return config.cls == TrafficClass::Normal ? gen_normal_pairs(config) : gen_tunnel_pairs(config);
}

void write_pcap(const std::vector<QueryResponsePair>& pairs, const std::string& path) {
  std::vector<const DnsPacketRecord*> records;
  records.reserve(pairs.size() * 2);
  for (const auto& pair : pairs) {
    records.push_back(&pair.query);
    if (pair.response) records.push_back(&*pair.response);
  }
  std::stable_sort(records.begin(), records.end(), [](const DnsPacketRecord* a, const DnsPacketRecord* b) {
    return a->timestamp_micros < b->timestamp_micros;
  });
  PcapWriter writer(path);
  for (const auto* rec : records) writer.write(rec->timestamp_micros, frame_dns_record(*rec));
  writer.close();
}

}  // namespace dnsveil
