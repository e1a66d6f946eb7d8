#include "fabricbench/topology.hpp"

#include <algorithm>

#include <json.hpp>

#include "fabricbench/errors.hpp"
#include "fabricbench/util.hpp"

namespace fabricbench {

FatTreeTopology build_fat_tree(int leaves, int spines, int nodes_per_leaf,
                               int uplinks_per_leaf_per_spine, double link_capacity) {
  if (leaves < 1 || spines < 1 || nodes_per_leaf < 1 || uplinks_per_leaf_per_spine < 1) {
    throw ValidationError("build_fat_tree: all counts must be >= 1");
  }
  if (link_capacity <= 0) throw ValidationError("build_fat_tree: link capacity must be > 0");
  return {leaves, spines, nodes_per_leaf, uplinks_per_leaf_per_spine, link_capacity};
}

namespace {

void check_node(const FatTreeTopology& topo, int node) {
  if (node < 0 || node >= topo.total_nodes()) {
    throw ValidationError("unknown node id " + std::to_string(node));
  }
}

}  // namespace

Route route(const FatTreeTopology& topo, int src, int dst) {
  check_node(topo, src);
  check_node(topo, dst);
  Route r;
  r.src = src;
  r.dst = dst;
  if (src == dst) return r;

  const int src_leaf = topo.leaf_of(src);
  const int dst_leaf = topo.leaf_of(dst);
  if (src_leaf == dst_leaf) {
    r.links = {src, dst};  // node cables carry the node's own id
    return r;
  }
  const int spine = std::max(src, dst) % topo.spines;
  const int parallel = topo.leaf_of(std::min(src, dst)) % topo.uplinks_per_leaf_per_spine;
  r.links = {src, topo.uplink_cable(src_leaf, spine, parallel),
             topo.uplink_cable(dst_leaf, spine, parallel), dst};
  return r;
}

double oversubscription_ratio(const FatTreeTopology& topo) {
  return static_cast<double>(topo.nodes_per_leaf) /
         (static_cast<double>(topo.spines) * topo.uplinks_per_leaf_per_spine);
}

std::vector<int> route_slots(const FatTreeTopology& topo, int src, int dst) {
  const Route r = route(topo, src, dst);
  std::vector<int> slots;
  if (r.links.empty()) return slots;
  // First cable leaves the source upward, last enters the destination
  // downward; a cross-leaf route's middle cables go up then down.
  const std::size_t n = r.links.size();
  for (std::size_t i = 0; i < n; ++i) {
    const bool up = i < n / 2;
    slots.push_back(2 * r.links[i] + (up ? 0 : 1));
  }
  return slots;
}

std::vector<LinkLoad> contention_map(const FatTreeTopology& topo, const std::vector<Flow>& flows) {
  std::vector<LinkLoad> loads(2 * static_cast<std::size_t>(topo.link_count()));
  for (int cable = 0; cable < topo.link_count(); ++cable) {
    loads[2 * cable] = {cable, true, 0, 0, 0};
    loads[2 * cable + 1] = {cable, false, 0, 0, 0};
  }
  for (const Flow& f : flows) {
    if (f.src == f.dst) throw ValidationError("flow '" + f.id + "': src == dst");
    for (int slot : route_slots(topo, f.src, f.dst)) {
      LinkLoad& load = loads[slot];
      load.flow_count += 1;
      if (f.demand_bytes) load.demand_bytes += *f.demand_bytes;
      else load.unbounded_flows += 1;
    }
  }
  return loads;
}

std::string link_name(const FatTreeTopology& topo, int cable) {
  if (cable < 0 || cable >= topo.link_count()) {
    throw ValidationError("unknown link id " + std::to_string(cable));
  }
  if (cable < topo.node_link_count()) return "node" + std::to_string(cable);
  int rest = cable - topo.node_link_count();
  const int parallel = rest % topo.uplinks_per_leaf_per_spine;
  rest /= topo.uplinks_per_leaf_per_spine;
  const int spine = rest % topo.spines;
  const int leaf = rest / topo.spines;
  return "leaf" + std::to_string(leaf) + ":spine" + std::to_string(spine) + "." +
         std::to_string(parallel);
}

FatTreeTopology parse_topology(const std::string& json_text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  if (!doc.is_object()) throw ValidationError(origin + ": top level must be an object");
  for (const char* key : {"leaves", "spines", "nodes_per_leaf", "uplinks_per_leaf_per_spine", "link_capacity"}) {
    if (!doc.contains(key)) throw ValidationError(origin + ": missing field '" + std::string(key) + "'");
  }
  return build_fat_tree(doc["leaves"].get<int>(), doc["spines"].get<int>(),
                        doc["nodes_per_leaf"].get<int>(),
                        doc["uplinks_per_leaf_per_spine"].get<int>(),
                        doc["link_capacity"].get<double>());
}

FatTreeTopology load_topology(const std::string& path) {
  return parse_topology(read_file(path), path);
}

}  // namespace fabricbench
