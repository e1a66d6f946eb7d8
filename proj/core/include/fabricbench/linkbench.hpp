#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fabricbench/bandwidth_matrix.hpp"
#include "fabricbench/socket.hpp"

namespace fabricbench {

struct AgentInfo {
  std::string id;
  std::string address;  // data-plane listen address
};

struct BenchPlan {
  std::vector<AgentInfo> agents;
  std::uint64_t msg_size = 1 << 20;  // 1 MiB
  int repetitions = 16;
  int warmup = 3;                    // leading repetitions discarded
  std::string mode = "serial";       // serial | parallel
  double pair_timeout_s = 30.0;
};

BenchPlan load_bench_plan(const std::string& path);
BenchPlan parse_bench_plan(const std::string& json_text, const std::string& origin);

struct PairResult {
  std::string src;
  std::string dst;
  double median_rtt = 0;        // s, over post-warm-up samples
  double bandwidth_gbps = 0;    // msg_size / (median_rtt / 2)
  std::vector<double> samples;  // post-warm-up round-trip times
  std::uint64_t bytes_sent = 0;
  std::uint64_t bytes_received = 0;
};

// One measured pair over an established connection. The initiator sends PING
// frames carrying msg_size bytes and expects PONG echoes of equal length with
// the sequence number preserved.
PairResult pingpong(Socket& peer, std::uint64_t msg_size, int repetitions, int warmup);

struct PairInterval {
  std::string src;
  std::string dst;
  double start_s = 0;  // coordinator clock, relative to run start
  double end_s = 0;
  bool ok = false;
};

struct CoordinatorOptions {
  std::string listen_address = "0.0.0.0:7600";
  double registration_timeout_s = 30.0;
};

struct CoordinatorOutcome {
  BandwidthMatrix matrix;
  std::vector<PairResult> results;
  std::vector<PairInterval> intervals;  // serial mode: provably disjoint
  bool partial = false;                 // some pairs flagged
};

// Drives registered agents through the pair schedule. Serial mode runs one
// pair at a time in lexicographic (src, dst) order; parallel mode raises a
// START barrier after every agent acknowledged its PLAN. Unreachable or dying
// agents flag their pairs; the remaining pairs still complete.
CoordinatorOutcome run_coordinator(const BenchPlan& plan, const CoordinatorOptions& opts);

struct AgentOptions {
  std::string listen_address;
  std::string coordinator_address;
  std::string id;       // optional; coordinator can also match by address
  int fail_after = -1;  // fault injection: exit hard after N initiator sessions
};

// Runs the reflector service plus assigned initiator sessions until BYE.
// Returns 0 on orderly shutdown, nonzero after connection loss.
int run_agent(const AgentOptions& opts);

}  // namespace fabricbench
