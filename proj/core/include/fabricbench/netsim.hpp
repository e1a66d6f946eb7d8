#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fabricbench/analysis.hpp"
#include "fabricbench/bandwidth_matrix.hpp"
#include "fabricbench/topology.hpp"

namespace fabricbench {

enum class SimMode { Serial, Parallel };

SimMode parse_sim_mode(const std::string& text);
std::string to_string(SimMode mode);

struct SimPlan {
  FatTreeTopology topo;
  std::uint64_t msg_size = 1 << 20;          // bytes
  SimMode mode = SimMode::Serial;
  double per_message_latency_us = 0;
  std::vector<Flow> background_flows;        // treated as unbounded demand
  std::optional<int> max_concurrent;         // parallel mode: batch size in pairs
};

// Max-min fair rates by progressive filling over directed capacity slots.
// Internally exact (rational arithmetic); returned doubles are rounded toward
// zero so per-link sums never exceed capacity.
std::vector<double> maxmin_allocate(const std::vector<double>& link_capacity,
                                    const std::vector<std::vector<int>>& flow_links);

// Topology overload: flows are routed with route_slots; both directions of a
// cable are independent capacity slots (full duplex).
std::vector<double> maxmin_allocate(const FatTreeTopology& topo, const std::vector<Flow>& flows);

// All-pairs ping-pong over the tree. Serial mode times each unordered pair
// alone (plus background flows); parallel mode allocates every pair's two
// directed flows simultaneously. bandwidth = msg_size / (round_trip / 2).
BandwidthMatrix simulate(const SimPlan& plan);

Histogram histogram_of(const BandwidthMatrix& matrix, int bins);

std::vector<Flow> load_flows(const std::string& path);

}  // namespace fabricbench
