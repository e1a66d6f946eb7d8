#include "fabricbench/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "fabricbench/errors.hpp"
#include "fabricbench/util.hpp"

namespace fabricbench {

namespace {

using Rational = boost::multiprecision::cpp_rational;

Rational rational_from_double(double v) {
  // Doubles are dyadic rationals; cpp_rational converts them exactly.
  return Rational(v);
}

double round_down_to_double(const Rational& r) {
  double d = r.convert_to<double>();
  while (rational_from_double(d) > r) d = std::nextafter(d, -std::numeric_limits<double>::infinity());
  return d;
}

// Progressive filling: raise all unfrozen flows uniformly until a link
// saturates, freeze the flows it carries, repeat. Links that saturate at the
// same level freeze in ascending link-id order (the allocation is unaffected).
std::vector<Rational> progressive_fill(const std::vector<Rational>& capacity,
                                       const std::vector<std::vector<int>>& flow_links) {
  const std::size_t n_links = capacity.size();
  const std::size_t n_flows = flow_links.size();
  for (std::size_t l = 0; l < n_links; ++l) {
    if (capacity[l] <= 0) throw ValidationError("maxmin_allocate: link capacity must be positive");
  }

  std::vector<int> active_count(n_links, 0);
  for (std::size_t f = 0; f < n_flows; ++f) {
    if (flow_links[f].empty()) throw ValidationError("maxmin_allocate: flow with empty route");
    for (int l : flow_links[f]) {
      if (l < 0 || static_cast<std::size_t>(l) >= n_links) {
        throw ValidationError("maxmin_allocate: flow references unknown link " + std::to_string(l));
      }
      active_count[l] += 1;
    }
  }

  std::vector<Rational> remaining = capacity;
  std::vector<Rational> rate(n_flows, 0);
  std::vector<bool> frozen(n_flows, false);
  Rational level = 0;
  std::size_t flows_left = n_flows;

  while (flows_left > 0) {
    Rational delta;
    bool found = false;
    for (std::size_t l = 0; l < n_links; ++l) {
      if (active_count[l] == 0) continue;
      Rational headroom = remaining[l] / active_count[l];
      if (!found || headroom < delta) {
        delta = headroom;
        found = true;
      }
    }
    if (!found) break;  // every remaining flow is off all links (cannot happen with non-empty routes)

    level += delta;
    for (std::size_t l = 0; l < n_links; ++l) {
      if (active_count[l] > 0) remaining[l] -= delta * active_count[l];
    }
    for (std::size_t l = 0; l < n_links; ++l) {
      if (active_count[l] == 0 || remaining[l] != 0) continue;
      for (std::size_t f = 0; f < n_flows; ++f) {
        if (frozen[f]) continue;
        if (std::find(flow_links[f].begin(), flow_links[f].end(), static_cast<int>(l)) ==
            flow_links[f].end()) {
          continue;
        }
        frozen[f] = true;
        rate[f] = level;
        --flows_left;
        for (int fl : flow_links[f]) active_count[fl] -= 1;
      }
    }
  }
  return rate;
}

std::vector<Rational> capacities_as_rational(const std::vector<double>& capacity) {
  std::vector<Rational> out;
  out.reserve(capacity.size());
  for (double c : capacity) out.push_back(rational_from_double(c));
  return out;
}

double pair_round_trip_seconds(std::uint64_t msg_size, double latency_us, const Rational& fwd_gbps,
                               const Rational& rev_gbps) {
  // Exact until the final conversion; both transfer legs plus fixed per-message overhead.
  const Rational msg_gb = Rational(msg_size) / Rational(1000000000);
  const Rational latency_s = rational_from_double(latency_us) / Rational(1000000);
  const Rational rt = 2 * latency_s + msg_gb / fwd_gbps + msg_gb / rev_gbps;
  return rt.convert_to<double>();
}

double pair_bandwidth_gbps(std::uint64_t msg_size, double round_trip_s) {
  return (static_cast<double>(msg_size) / (round_trip_s / 2.0)) / 1e9;
}

}  // namespace

SimMode parse_sim_mode(const std::string& text) {
  if (text == "serial") return SimMode::Serial;
  if (text == "parallel") return SimMode::Parallel;
  throw ValidationError("unknown mode '" + text + "' (expected serial|parallel)");
}

std::string to_string(SimMode mode) {
  return mode == SimMode::Serial ? "serial" : "parallel";
}

std::vector<double> maxmin_allocate(const std::vector<double>& link_capacity,
                                    const std::vector<std::vector<int>>& flow_links) {
  const auto rates = progressive_fill(capacities_as_rational(link_capacity), flow_links);
  std::vector<double> out;
  out.reserve(rates.size());
  for (const Rational& r : rates) out.push_back(round_down_to_double(r));
  return out;
}

std::vector<double> maxmin_allocate(const FatTreeTopology& topo, const std::vector<Flow>& flows) {
  std::vector<double> caps(2 * static_cast<std::size_t>(topo.link_count()), topo.link_capacity);
  std::vector<std::vector<int>> flow_links;
  flow_links.reserve(flows.size());
  for (const Flow& f : flows) {
    if (f.src == f.dst) throw ValidationError("flow '" + f.id + "': src == dst");
    flow_links.push_back(route_slots(topo, f.src, f.dst));
  }
  return maxmin_allocate(caps, flow_links);
}

BandwidthMatrix simulate(const SimPlan& plan) {
  if (plan.msg_size == 0) throw ValidationError("simulate: msg_size must be > 0");
  if (plan.per_message_latency_us < 0) throw ValidationError("simulate: latency must be >= 0");
  const FatTreeTopology& topo = plan.topo;
  const int n = topo.total_nodes();

  const std::vector<Rational> caps(2 * static_cast<std::size_t>(topo.link_count()),
                                   rational_from_double(topo.link_capacity));

  std::vector<std::vector<int>> background_links;
  for (const Flow& f : plan.background_flows) {
    if (f.src == f.dst) throw ValidationError("background flow '" + f.id + "': src == dst");
    background_links.push_back(route_slots(topo, f.src, f.dst));
  }

  BandwidthMatrix matrix;
  matrix.n = n;
  matrix.mode = to_string(plan.mode);
  matrix.msg_size = plan.msg_size;

  std::vector<std::pair<int, int>> pairs;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) pairs.emplace_back(a, b);
  }

  auto emit_entry = [&](int a, int b, const Rational& fwd, const Rational& rev) {
    if (fwd <= 0 || rev <= 0) throw ValidationError("simulate: zero allocated rate");
    PairEntry e;
    e.src = std::to_string(a);
    e.dst = std::to_string(b);
    e.time_s = pair_round_trip_seconds(plan.msg_size, plan.per_message_latency_us, fwd, rev);
    e.bandwidth_gbps = pair_bandwidth_gbps(plan.msg_size, e.time_s);
    matrix.entries.push_back(std::move(e));
  };

  if (plan.mode == SimMode::Serial) {
    for (const auto& [a, b] : pairs) {
      std::vector<std::vector<int>> flow_links;
      flow_links.push_back(route_slots(topo, a, b));
      flow_links.push_back(route_slots(topo, b, a));
      for (const auto& bg : background_links) flow_links.push_back(bg);
      const auto rates = progressive_fill(caps, flow_links);
      emit_entry(a, b, rates[0], rates[1]);
    }
    return matrix;
  }

  // Parallel mode: all pairs at once, optionally batched.
  const std::size_t batch =
      plan.max_concurrent && *plan.max_concurrent > 0 ? static_cast<std::size_t>(*plan.max_concurrent)
                                                      : pairs.size();
  for (std::size_t start = 0; start < pairs.size(); start += batch) {
    const std::size_t end = std::min(start + batch, pairs.size());
    std::vector<std::vector<int>> flow_links;
    for (std::size_t i = start; i < end; ++i) {
      flow_links.push_back(route_slots(topo, pairs[i].first, pairs[i].second));
      flow_links.push_back(route_slots(topo, pairs[i].second, pairs[i].first));
    }
    for (const auto& bg : background_links) flow_links.push_back(bg);
    const auto rates = progressive_fill(caps, flow_links);
    for (std::size_t i = start; i < end; ++i) {
      emit_entry(pairs[i].first, pairs[i].second, rates[2 * (i - start)], rates[2 * (i - start) + 1]);
    }
  }
  return matrix;
}

Histogram histogram_of(const BandwidthMatrix& matrix, int bins) {
  if (matrix.entries.empty()) throw ValidationError("histogram_of: empty matrix");
  return build_histogram(matrix.bandwidths(), bins);
}

std::vector<Flow> load_flows(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (!doc.is_array()) throw ValidationError(path + ": expected a top-level array of flows");
  std::vector<Flow> flows;
  int index = 0;
  for (const auto& j : doc) {
    const std::string context = path + ": flows[" + std::to_string(index++) + "]";
    Flow f;
    f.id = j.value("id", "flow" + std::to_string(index));
    if (!j.contains("src") || !j.contains("dst")) {
      throw ValidationError(context + ": missing src/dst");
    }
    f.src = j["src"].get<int>();
    f.dst = j["dst"].get<int>();
    if (j.contains("demand") && j["demand"].is_number()) {
      f.demand_bytes = j["demand"].get<std::uint64_t>();
    }
    if (f.src == f.dst) throw ValidationError(context + ": src == dst");
    flows.push_back(std::move(f));
  }
  return flows;
}

}  // namespace fabricbench
