#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fabricbench {

// Two-level fat tree. Links are full-duplex cables: one per node down to its
// leaf, plus `uplinks_per_leaf_per_spine` parallel cables per (leaf, spine)
// pair. Cable ids: [0, total_nodes) are node cables (cable i belongs to node
// i); uplink cables follow, ordered by (leaf, spine, parallel index).
struct FatTreeTopology {
  int leaves = 1;
  int spines = 1;
  int nodes_per_leaf = 1;
  int uplinks_per_leaf_per_spine = 1;
  double link_capacity = 12.5;  // GB/s per direction (100 Gbit/s EDR default)

  int total_nodes() const { return leaves * nodes_per_leaf; }
  int node_link_count() const { return total_nodes(); }
  int uplink_count() const { return leaves * spines * uplinks_per_leaf_per_spine; }
  int link_count() const { return node_link_count() + uplink_count(); }
  int leaf_of(int node) const { return node / nodes_per_leaf; }
  int uplink_cable(int leaf, int spine, int parallel) const {
    return node_link_count() +
           (leaf * spines + spine) * uplinks_per_leaf_per_spine + parallel;
  }
};

struct Route {
  int src = 0;
  int dst = 0;
  std::vector<int> links;  // cable ids; empty when src == dst
};

struct Flow {
  std::string id;
  int src = 0;
  int dst = 0;
  std::optional<std::uint64_t> demand_bytes;  // nullopt = unbounded
};

FatTreeTopology build_fat_tree(int leaves, int spines, int nodes_per_leaf,
                               int uplinks_per_leaf_per_spine, double link_capacity);

// Deterministic routing. Same-leaf pairs use the two node cables only.
// Cross-leaf pairs go node -> leaf -> spine -> leaf -> node with
// spine = max(src, dst) mod spines (so both orientations of a pair share the
// spine) and parallel uplink = leaf(min(src, dst)) mod uplinks.
Route route(const FatTreeTopology& topo, int src, int dst);

// nodes_per_leaf / (spines x uplinks); > 1 means all-to-all traffic can
// oversubscribe the uplinks.
double oversubscription_ratio(const FatTreeTopology& topo);

struct LinkLoad {
  int cable = 0;
  bool up = false;  // node->leaf / leaf->spine direction of the cable
  int flow_count = 0;
  std::uint64_t demand_bytes = 0;  // sum of finite demands
  int unbounded_flows = 0;
};

// Per-direction link occupancy for a flow set.
std::vector<LinkLoad> contention_map(const FatTreeTopology& topo, const std::vector<Flow>& flows);

// Directed capacity slots: cable c occupies slots 2c (up) and 2c+1 (down).
// Returns the slot sequence a src->dst transfer crosses; used by the
// simulator and by contention accounting.
std::vector<int> route_slots(const FatTreeTopology& topo, int src, int dst);

std::string link_name(const FatTreeTopology& topo, int cable);

FatTreeTopology load_topology(const std::string& path);
FatTreeTopology parse_topology(const std::string& json_text, const std::string& origin);

}  // namespace fabricbench
