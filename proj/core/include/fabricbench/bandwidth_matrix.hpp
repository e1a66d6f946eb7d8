#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fabricbench {

struct PairEntry {
  std::string src;
  std::string dst;
  double bandwidth_gbps = 0;  // one-way payload rate, GB/s
  double time_s = 0;          // full ping-pong round trip
};

struct FailedPair {
  std::string src;
  std::string dst;
  std::string reason;
};

// One entry per unordered pair (src listed first in generation order). The
// simulator and the socket harness emit the identical CSV schema so analysis
// is transport-agnostic.
struct BandwidthMatrix {
  int n = 0;                 // endpoints
  std::string mode;          // "serial" | "parallel"
  std::optional<std::uint64_t> msg_size;
  std::vector<PairEntry> entries;
  std::vector<FailedPair> failed;

  std::vector<double> bandwidths() const;
  const PairEntry* find(const std::string& src, const std::string& dst) const;
};

// Leading `# key=value` comments (mode, msg_size, failed pairs), then a
// `src,dst,bandwidth_gbps,time_s` header and one row per pair.
std::string matrix_to_csv(const BandwidthMatrix& matrix);
BandwidthMatrix parse_matrix_csv(const std::string& text, const std::string& origin);
BandwidthMatrix load_matrix_csv(const std::string& path);

}  // namespace fabricbench
