#include "fabricbench/inventory.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fabricbench/errors.hpp"
#include "fabricbench/util.hpp"

namespace fabricbench {

namespace {

using nlohmann::json;

// One-decimal rounding slack: listed table values carry a single decimal.
constexpr double kListedTolerance = 0.05;

void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

double get_number(const json& j, const std::string& context, const std::string& key) {
  require(j.contains(key), context + ": missing field '" + key + "'");
  require(j[key].is_number(), context + "." + key + ": expected a number");
  return j[key].get<double>();
}

int get_count(const json& j, const std::string& context, const std::string& key) {
  const double v = get_number(j, context, key);
  require(v >= 0 && v == std::floor(v), context + "." + key + ": expected a non-negative integer");
  return static_cast<int>(v);
}

std::string get_string(const json& j, const std::string& context, const std::string& key) {
  require(j.contains(key), context + ": missing field '" + key + "'");
  require(j[key].is_string(), context + "." + key + ": expected a string");
  return j[key].get<std::string>();
}

CpuSpec parse_cpu(const json& j, const std::string& context) {
  require(j.is_object(), context + ": expected an object");
  CpuSpec cpu;
  cpu.model_name = get_string(j, context, "model_name");
  cpu.sockets = get_count(j, context, "sockets");
  cpu.cores_per_socket = get_count(j, context, "cores_per_socket");
  cpu.base_freq = get_number(j, context, "base_freq");
  cpu.flops_per_cycle_per_core = get_count(j, context, "flops_per_cycle_per_core");
  require(cpu.sockets >= 1, context + ".sockets: must be >= 1");
  require(cpu.cores_per_socket >= 1, context + ".cores_per_socket: must be >= 1");
  require(cpu.base_freq > 0, context + ".base_freq: must be > 0");
  require(cpu.flops_per_cycle_per_core > 0, context + ".flops_per_cycle_per_core: must be > 0");
  return cpu;
}

GpuSpec parse_gpu(const json& j, const std::string& context) {
  require(j.is_object(), context + ": expected an object");
  GpuSpec gpu;
  gpu.model_name = get_string(j, context, "model_name");
  gpu.count_per_node = get_count(j, context, "count_per_node");
  gpu.dp_units = get_count(j, context, "dp_units");
  gpu.boost_freq = get_number(j, context, "boost_freq");
  return gpu;
}

ListedPeaks parse_listed(const json& j, const std::string& context) {
  ListedPeaks listed;
  if (!j.contains("listed")) return listed;
  const json& l = j["listed"];
  require(l.is_object(), context + ".listed: expected an object");
  if (l.contains("cpu_tflops")) listed.cpu_tflops = get_number(l, context + ".listed", "cpu_tflops");
  if (l.contains("cpu_total_tflops")) listed.cpu_total_tflops = get_number(l, context + ".listed", "cpu_total_tflops");
  if (l.contains("gpu_tflops")) listed.gpu_tflops = get_number(l, context + ".listed", "gpu_tflops");
  if (l.contains("gpu_total_tflops")) listed.gpu_total_tflops = get_number(l, context + ".listed", "gpu_total_tflops");
  return listed;
}

}  // namespace

double node_cpu_peak(const NodeSpec& spec) {
  const CpuSpec& c = spec.cpu;
  const double gflops = static_cast<double>(c.sockets) * c.cores_per_socket *
                        c.flops_per_cycle_per_core * c.base_freq;
  return gflops / 1000.0;
}

GpuPeak node_gpu_peak(const std::optional<GpuSpec>& gpu) {
  if (!gpu.has_value() || gpu->count_per_node == 0) return {0.0, false};
  const double gflops = static_cast<double>(gpu->count_per_node) * gpu->dp_units * 2.0 * gpu->boost_freq;
  return {gflops / 1000.0, true};
}

ClusterPeakReport cluster_peak(const ClusterInventory& inv) {
  if (inv.classes.empty()) throw ValidationError("empty inventory");
  ClusterPeakReport report;
  for (const NodeSpec& spec : inv.classes) {
    ClassPeak row;
    row.class_name = spec.class_name;
    row.node_count = spec.node_count;
    row.cores_per_node = spec.cpu.sockets * spec.cpu.cores_per_socket;

    row.cpu_node_tflops_computed = node_cpu_peak(spec);
    row.cpu_node_tflops = spec.listed.cpu_tflops.value_or(row.cpu_node_tflops_computed);
    if (spec.listed.cpu_tflops &&
        std::abs(*spec.listed.cpu_tflops - row.cpu_node_tflops_computed) > kListedTolerance) {
      report.warnings.push_back(
          spec.class_name + ": listed CPU peak " + format_double(*spec.listed.cpu_tflops) +
          " TF/s disagrees with computed " + format_fixed(row.cpu_node_tflops_computed, 3) + " TF/s");
    }

    const GpuPeak gpu = node_gpu_peak(spec.gpu);
    if (gpu.present) {
      row.gpu_node_tflops_computed = gpu.tflops;
      row.gpu_node_tflops = spec.listed.gpu_tflops.value_or(gpu.tflops);
      if (spec.listed.gpu_tflops && std::abs(*spec.listed.gpu_tflops - gpu.tflops) > kListedTolerance) {
        report.warnings.push_back(
            spec.class_name + ": listed GPU peak " + format_double(*spec.listed.gpu_tflops) +
            " TF/s disagrees with computed " + format_fixed(gpu.tflops, 3) + " TF/s");
      }
    }

    row.node_tflops = row.cpu_node_tflops + row.gpu_node_tflops.value_or(0.0);

    const double computed_class_cpu = spec.node_count * row.cpu_node_tflops;
    const double computed_class_gpu = spec.node_count * row.gpu_node_tflops.value_or(0.0);
    double class_total = spec.listed.cpu_total_tflops.value_or(computed_class_cpu) +
                         spec.listed.gpu_total_tflops.value_or(computed_class_gpu);
    if (spec.listed.cpu_total_tflops &&
        std::abs(*spec.listed.cpu_total_tflops - spec.node_count * row.cpu_node_tflops_computed) >
            kListedTolerance * spec.node_count) {
      report.warnings.push_back(
          spec.class_name + ": listed class CPU total " + format_double(*spec.listed.cpu_total_tflops) +
          " TF/s disagrees with " + format_double(spec.node_count) + " x " +
          format_fixed(row.cpu_node_tflops_computed, 3) + " TF/s");
    }
    row.class_tflops = class_total;

    report.computed_nodes += spec.node_count;
    report.computed_cores += static_cast<long>(row.cores_per_node) * spec.node_count;
    report.computed_tflops += class_total;
    report.classes.push_back(row);
  }

  report.total_nodes = inv.listed_totals.node_count.value_or(report.computed_nodes);
  report.total_cores = inv.listed_totals.cores.value_or(report.computed_cores);
  report.total_tflops = inv.listed_totals.tflops.value_or(report.computed_tflops);
  if (inv.listed_totals.node_count && *inv.listed_totals.node_count != report.computed_nodes) {
    report.warnings.push_back("listed total node count " + std::to_string(*inv.listed_totals.node_count) +
                              " disagrees with class rows summing to " + std::to_string(report.computed_nodes));
  }
  if (inv.listed_totals.cores && *inv.listed_totals.cores != report.computed_cores) {
    report.warnings.push_back("listed total core count " + std::to_string(*inv.listed_totals.cores) +
                              " disagrees with class rows summing to " + std::to_string(report.computed_cores));
  }
  if (inv.listed_totals.tflops && std::abs(*inv.listed_totals.tflops - report.computed_tflops) > 0.1) {
    report.warnings.push_back("listed total " + format_double(*inv.listed_totals.tflops) +
                              " TF/s disagrees with class rows summing to " +
                              format_fixed(report.computed_tflops, 1) + " TF/s");
  }
  return report;
}

ClusterInventory parse_inventory(const std::string& json_text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": " + e.what());
  }
  require(doc.is_object(), origin + ": top level must be an object");
  require(doc.contains("classes") && doc["classes"].is_array(),
          origin + ": missing top-level 'classes' array");

  ClusterInventory inv;
  if (doc.contains("interconnect")) inv.interconnect = doc["interconnect"].get<std::string>();

  std::set<std::string> seen;
  int index = 0;
  for (const json& c : doc["classes"]) {
    const std::string context = origin + ": classes[" + std::to_string(index) + "]";
    NodeSpec spec;
    spec.class_name = get_string(c, context, "class_name");
    require(seen.insert(spec.class_name).second, context + ": duplicate class name '" + spec.class_name + "'");
    require(c.contains("cpu"), context + ": missing field 'cpu'");
    spec.cpu = parse_cpu(c["cpu"], context + ".cpu");
    if (c.contains("gpu") && !c["gpu"].is_null()) spec.gpu = parse_gpu(c["gpu"], context + ".gpu");
    spec.memory = get_number(c, context, "memory");
    require(spec.memory > 0, context + ".memory: must be > 0");
    if (c.contains("storage")) spec.storage = get_number(c, context, "storage");
    spec.node_count = get_count(c, context, "node_count");
    require(spec.node_count >= 1, context + ".node_count: must be >= 1");
    spec.listed = parse_listed(c, context);
    inv.classes.push_back(std::move(spec));
    ++index;
  }

  if (doc.contains("listed_totals")) {
    const json& t = doc["listed_totals"];
    require(t.is_object(), origin + ".listed_totals: expected an object");
    if (t.contains("node_count")) inv.listed_totals.node_count = get_count(t, origin + ".listed_totals", "node_count");
    if (t.contains("cores")) inv.listed_totals.cores = static_cast<long>(get_number(t, origin + ".listed_totals", "cores"));
    if (t.contains("memory_gb")) inv.listed_totals.memory_gb = get_number(t, origin + ".listed_totals", "memory_gb");
    if (t.contains("tflops")) inv.listed_totals.tflops = get_number(t, origin + ".listed_totals", "tflops");
  }
  return inv;
}

ClusterInventory load_inventory(const std::string& path) {
  return parse_inventory(read_file(path), path);
}

std::string peak_table_csv(const ClusterPeakReport& report) {
  std::ostringstream out;
  out << "class,nodes,cores_per_node,cpu_tflops_per_node,gpu_tflops_per_node,node_tflops,class_tflops\n";
  for (const ClassPeak& row : report.classes) {
    out << row.class_name << ',' << row.node_count << ',' << row.cores_per_node << ','
        << format_fixed(row.cpu_node_tflops, 1) << ','
        << (row.gpu_node_tflops ? format_fixed(*row.gpu_node_tflops, 1) : std::string()) << ','
        << format_fixed(row.node_tflops, 1) << ',' << format_fixed(row.class_tflops, 1) << '\n';
  }
  out << "total," << report.total_nodes << ',' << report.total_cores << ",,,,"
      << format_fixed(report.total_tflops, 1) << '\n';
  return out.str();
}

}  // namespace fabricbench
