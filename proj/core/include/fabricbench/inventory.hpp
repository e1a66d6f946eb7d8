#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fabricbench {

struct CpuSpec {
  std::string model_name;
  int sockets = 1;
  int cores_per_socket = 1;
  double base_freq = 0;                 // GHz
  int flops_per_cycle_per_core = 0;     // vector width x FMA factor x unit count
};

struct GpuSpec {
  std::string model_name;
  int count_per_node = 0;
  int dp_units = 0;                     // double-precision lanes per device
  double boost_freq = 0;                // GHz
};

// Vendor-listed figures, kept separately from the computed model so the
// report can reproduce a published table verbatim while flagging rows whose
// listed value disagrees with the formula.
struct ListedPeaks {
  std::optional<double> cpu_tflops;         // per node
  std::optional<double> cpu_total_tflops;   // per class
  std::optional<double> gpu_tflops;         // per node
  std::optional<double> gpu_total_tflops;   // per class
};

struct NodeSpec {
  std::string class_name;
  CpuSpec cpu;
  std::optional<GpuSpec> gpu;
  double memory = 0;    // GB
  double storage = 0;   // TB, 0 when not populated
  int node_count = 1;
  ListedPeaks listed;
};

struct ListedTotals {
  std::optional<int> node_count;
  std::optional<long> cores;
  std::optional<double> memory_gb;
  std::optional<double> tflops;
};

struct ClusterInventory {
  std::vector<NodeSpec> classes;
  std::string interconnect;
  ListedTotals listed_totals;
};

// sockets x cores x flops/cycle x GHz, in TFlop/s.
double node_cpu_peak(const NodeSpec& spec);

struct GpuPeak {
  double tflops = 0;
  bool present = false;   // false: no accelerator on this class
};
// count x dp_units x 2 x GHz, in TFlop/s; absent GPU reports 0 / not present.
GpuPeak node_gpu_peak(const std::optional<GpuSpec>& gpu);

struct ClassPeak {
  std::string class_name;
  int node_count = 0;
  int cores_per_node = 0;
  double cpu_node_tflops = 0;                  // effective (listed preferred)
  double cpu_node_tflops_computed = 0;
  std::optional<double> gpu_node_tflops;       // effective
  std::optional<double> gpu_node_tflops_computed;
  double node_tflops = 0;                      // cpu + gpu, effective
  double class_tflops = 0;                     // effective class total
};

struct ClusterPeakReport {
  std::vector<ClassPeak> classes;
  int total_nodes = 0;
  long total_cores = 0;
  double total_tflops = 0;
  int computed_nodes = 0;
  long computed_cores = 0;
  double computed_tflops = 0;
  std::vector<std::string> warnings;   // listed-vs-computed discrepancies
};

ClusterPeakReport cluster_peak(const ClusterInventory& inv);

ClusterInventory load_inventory(const std::string& path);
ClusterInventory parse_inventory(const std::string& json_text, const std::string& origin);

// Per-class CSV table plus a final "total" row, as printed by `model peak`.
std::string peak_table_csv(const ClusterPeakReport& report);

}  // namespace fabricbench
