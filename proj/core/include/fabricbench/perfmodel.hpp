#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fabricbench {

struct FreqSweepPoint {
  double freq = 0;              // GHz
  double measured_gflops = 0;
  std::optional<double> power;  // W
};

struct MemoryParams {
  double latency = 0;             // ns
  double bytes_in_flight = 384;   // 6 cache lines of 64 B
  int channels = 1;
};

struct LinpackRun {
  std::string label;
  long long n = 0;
  int nb = 0;
  int p = 1;
  int q = 1;
  double time = 0;             // s
  double rmax = 0;             // TFlop/s
  double rmax_tolerance = 0;   // fraction
  double rpeak = 0;            // TFlop/s
  std::optional<double> power; // kW
  bool power_estimated = false;
};

struct ScalingPoint {
  int workers = 0;
  double time = 0;  // s
};

struct ScalingSeries {
  std::string label;
  std::vector<ScalingPoint> points;                // workers strictly increasing
  std::map<std::string, std::string> metadata;
};

// vector_width x exec_units x flops_per_fma x freq, in GFlop/s.
double core_peak_flops(int vector_width, int exec_units, int flops_per_fma, double freq_ghz);

struct LittleLawBandwidth {
  double per_channel = 0;  // GB/s
  double total = 0;        // GB/s
};
// bytes in flight / latency, per channel; total scales by channel count.
LittleLawBandwidth little_law_bandwidth(const MemoryParams& params);

// 100 x rmax / rpeak.
double linpack_efficiency(const LinpackRun& run);

struct PerfPerWattPoint {
  double freq = 0;             // GHz
  double gflops_per_watt = 0;
};
struct PerfPerWattCurve {
  std::vector<PerfPerWattPoint> points;  // input order preserved
  double argmax_freq = 0;                // ties resolve to the lowest frequency
};
PerfPerWattCurve perf_per_watt(const std::vector<FreqSweepPoint>& points);

struct SpeedupRow {
  int workers = 0;
  double speedup = 0;      // T(p0)/T(p)
  double efficiency = 0;   // speedup * p0 / p
};
std::vector<SpeedupRow> speedup_table(const ScalingSeries& series);

struct DeviationRow {
  int workers = 0;
  double ratio = 0;        // S(p) / (p/p0)
  bool superlinear = false;
};
// Ratio of achieved speedup to linear speedup; superlinear points are flagged,
// not rejected (measurement noise can produce them).
std::vector<DeviationRow> ideal_deviation(const ScalingSeries& series, double tolerance = 0.01);

// CSV with `# key=value` metadata comments and a `workers,time_s` header.
ScalingSeries parse_scaling_csv(const std::string& text, const std::string& origin);
ScalingSeries load_scaling_csv(const std::string& path);
std::string scaling_series_to_csv(const ScalingSeries& series);

std::vector<LinpackRun> load_linpack_runs(const std::string& path);

}  // namespace fabricbench
