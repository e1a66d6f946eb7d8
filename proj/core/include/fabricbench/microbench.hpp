#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fabricbench {

struct BenchResult {
  std::string name;
  int threads = 1;
  double duration = 0;      // s, wall time across all repetitions
  double metric_value = 0;  // GFlop/s, GB/s or ns depending on the benchmark
  std::string unit;
  int repetitions = 0;
  double cv = 0;            // coefficient of variation across repetitions
  bool pinned = false;      // thread affinity actually applied
};

struct FmaBenchOptions {
  int threads = 1;
  double seconds = 0.5;  // per repetition
  int repetitions = 3;
};

// Unrolled chains of independent fused multiply-adds (16 accumulators per
// thread, 2 flops per FMA). Best-of-repetitions aggregate throughput.
BenchResult fma_peak_bench(const FmaBenchOptions& opts);
BenchResult fma_peak_bench(int threads, double seconds);

struct TriadOptions {
  std::uint64_t array_elems = 6'000'000;
  int threads = 1;
  int repetitions = 6;                       // >= 5; best-of, cv recorded
  std::uint64_t cache_bytes = 32ull << 20;   // last-level cache assumption
  double scalar = 3.0;
};

// STREAM-style triad a(i) = b(i) + s*c(i); 24 bytes counted per element per
// sweep. Requires the three arrays to exceed 4x the stated cache size.
BenchResult stream_triad(const TriadOptions& opts);
BenchResult stream_triad(std::uint64_t array_elems, int threads);

enum class ChaseMode { Permuted, Sequential };

struct LatencyPoint {
  std::uint64_t buffer_bytes = 0;
  double latency_ns = 0;
};

struct LatencyOptions {
  std::uint64_t max_buffer = 64ull << 20;
  std::uint64_t min_buffer = 4096;
  int repetitions = 3;  // median per buffer size
  ChaseMode mode = ChaseMode::Permuted;
};

// Dependent-load ladder over power-of-two buffers: a pointer cycle is walked
// and the per-load round trip recorded. Permuted cycles defeat the prefetcher
// and expose the cache hierarchy; sequential cycles measure the prefetched
// floor.
std::vector<LatencyPoint> latency_chase(const LatencyOptions& opts);
std::vector<LatencyPoint> latency_chase(std::uint64_t max_buffer);

}  // namespace fabricbench
