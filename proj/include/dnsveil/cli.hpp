#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dnsveil/capture.hpp"
#include "dnsveil/features.hpp"

namespace dnsveil {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitParse = 3,
  kExitDegenerate = 4,
  kExitBadReference = 5,
};

/// Runs the command line `args` (without the program name). Human output
/// goes to `out`, diagnostics and usage text to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct ExtractSummary {
  std::uint64_t frames = 0;
  std::uint64_t dns_records = 0;
  std::uint64_t pairs = 0;
  std::uint64_t orphan_responses = 0;
  SkipStats skipped;
  std::uint64_t rows[3] = {0, 0, 0};
  std::uint64_t input_bytes = 0;
  std::uint64_t output_bytes = 0;

  double reduction_percent() const;
};

/// Reads every capture, pairs the DNS records and appends one row file per
/// feature set into `out_dir`.
ExtractSummary extract_features(const std::vector<std::string>& inputs, TrafficClass label,
                                const std::string& out_dir, const std::string& client_net = "",
                                std::int64_t window_micros = 5'000'000);

}  // namespace dnsveil
