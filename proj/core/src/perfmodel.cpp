#include "fabricbench/perfmodel.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fabricbench/errors.hpp"
#include "fabricbench/util.hpp"

namespace fabricbench {

double core_peak_flops(int vector_width, int exec_units, int flops_per_fma, double freq_ghz) {
  if (vector_width <= 0 || exec_units <= 0 || flops_per_fma <= 0 || freq_ghz <= 0) {
    throw ValidationError("core_peak_flops: all arguments must be positive");
  }
  return static_cast<double>(vector_width) * exec_units * flops_per_fma * freq_ghz;
}

LittleLawBandwidth little_law_bandwidth(const MemoryParams& params) {
  if (params.latency <= 0) throw ValidationError("little_law_bandwidth: latency must be > 0");
  if (params.bytes_in_flight <= 0) throw ValidationError("little_law_bandwidth: bytes_in_flight must be > 0");
  if (params.channels < 1) throw ValidationError("little_law_bandwidth: channels must be >= 1");
  LittleLawBandwidth bw;
  bw.per_channel = params.bytes_in_flight / params.latency;  // B/ns == GB/s
  bw.total = bw.per_channel * params.channels;
  return bw;
}

double linpack_efficiency(const LinpackRun& run) {
  if (run.rpeak <= 0) throw ValidationError("linpack_efficiency: rpeak must be > 0");
  if (run.rmax > run.rpeak) throw ValidationError("linpack_efficiency: efficiency above 100%");
  return 100.0 * run.rmax / run.rpeak;
}

PerfPerWattCurve perf_per_watt(const std::vector<FreqSweepPoint>& points) {
  if (points.empty()) throw ValidationError("perf_per_watt: empty sweep");
  std::vector<std::string> missing;
  for (const FreqSweepPoint& p : points) {
    if (!p.power.has_value() || *p.power <= 0) missing.push_back(format_double(p.freq));
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size(); ++i) list += (i ? ", " : "") + missing[i];
    throw ValidationError("perf_per_watt: missing power at frequency " + list + " GHz");
  }
  PerfPerWattCurve curve;
  double best = -1;
  double best_freq = 0;
  for (const FreqSweepPoint& p : points) {
    const double eff = p.measured_gflops / *p.power;
    curve.points.push_back({p.freq, eff});
    if (eff > best || (eff == best && p.freq < best_freq)) {
      best = eff;
      best_freq = p.freq;
    }
  }
  curve.argmax_freq = best_freq;
  return curve;
}

namespace {

void check_series(const ScalingSeries& series) {
  if (series.points.empty()) throw ValidationError("scaling series '" + series.label + "' is empty");
  std::set<int> seen;
  for (const ScalingPoint& p : series.points) {
    if (p.workers <= 0) throw ValidationError("scaling series: worker count must be positive");
    if (p.time <= 0) throw ValidationError("scaling series: time must be positive");
    if (!seen.insert(p.workers).second) {
      throw ValidationError("scaling series: duplicate worker count " + std::to_string(p.workers));
    }
  }
}

ScalingPoint baseline_of(const ScalingSeries& series) {
  // Baseline is the smallest measured worker count (not necessarily 1).
  return *std::min_element(series.points.begin(), series.points.end(),
                           [](const ScalingPoint& a, const ScalingPoint& b) { return a.workers < b.workers; });
}

}  // namespace

std::vector<SpeedupRow> speedup_table(const ScalingSeries& series) {
  check_series(series);
  const ScalingPoint base = baseline_of(series);
  std::vector<SpeedupRow> rows;
  for (const ScalingPoint& p : series.points) {
    SpeedupRow row;
    row.workers = p.workers;
    row.speedup = base.time / p.time;
    row.efficiency = row.speedup * base.workers / p.workers;
    rows.push_back(row);
  }
  return rows;
}

std::vector<DeviationRow> ideal_deviation(const ScalingSeries& series, double tolerance) {
  const auto rows = speedup_table(series);
  const int p0 = baseline_of(series).workers;
  std::vector<DeviationRow> out;
  for (const SpeedupRow& r : rows) {
    DeviationRow d;
    d.workers = r.workers;
    d.ratio = r.speedup / (static_cast<double>(r.workers) / p0);
    d.superlinear = d.ratio > 1.0 + tolerance;
    out.push_back(d);
  }
  return out;
}

ScalingSeries parse_scaling_csv(const std::string& text, const std::string& origin) {
  ScalingSeries series;
  bool header_seen = false;
  int lineno = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const std::size_t eq = body.find('=');
      if (eq != std::string::npos) {
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key == "label") series.label = value;
        else series.metadata[key] = value;
      }
      continue;
    }
    if (!header_seen) {
      if (line != "workers,time_s") {
        throw ValidationError(origin + ":" + std::to_string(lineno) +
                              ": expected header 'workers,time_s', got '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 2) {
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected 2 columns");
    }
    try {
      series.points.push_back({std::stoi(trim(cells[0])), std::stod(trim(cells[1]))});
    } catch (const std::exception&) {
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": malformed row '" + line + "'");
    }
  }
  if (!header_seen) throw ValidationError(origin + ": missing 'workers,time_s' header");
  check_series(series);
  for (std::size_t i = 1; i < series.points.size(); ++i) {
    if (series.points[i].workers <= series.points[i - 1].workers) {
      throw ValidationError(origin + ": worker counts must be strictly increasing");
    }
  }
  return series;
}

ScalingSeries load_scaling_csv(const std::string& path) {
  return parse_scaling_csv(read_file(path), path);
}

std::string scaling_series_to_csv(const ScalingSeries& series) {
  std::ostringstream out;
  if (!series.label.empty()) out << "# label=" << series.label << '\n';
  for (const auto& [key, value] : series.metadata) out << "# " << key << '=' << value << '\n';
  out << "workers,time_s\n";
  for (const ScalingPoint& p : series.points) {
    out << p.workers << ',' << format_double(p.time) << '\n';
  }
  return out.str();
}

std::vector<LinpackRun> load_linpack_runs(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  if (!doc.is_array()) throw ValidationError(path + ": expected a top-level array of runs");
  std::vector<LinpackRun> runs;
  int index = 0;
  for (const auto& j : doc) {
    const std::string context = path + ": runs[" + std::to_string(index++) + "]";
    LinpackRun run;
    run.label = j.value("label", std::string());
    run.n = j.value("n", 0LL);
    run.nb = j.value("nb", 0);
    run.p = j.value("p", 1);
    run.q = j.value("q", 1);
    run.time = j.value("time_s", 0.0);
    run.rmax = j.value("rmax_tflops", 0.0);
    run.rmax_tolerance = j.value("rmax_tolerance", 0.0);
    run.rpeak = j.value("rpeak_tflops", 0.0);
    if (j.contains("power_kw")) run.power = j["power_kw"].get<double>();
    run.power_estimated = j.value("power_estimated", false);
    if (run.n <= 0) throw ValidationError(context + ": n must be > 0");
    if (run.p * run.q < 1) throw ValidationError(context + ": p x q must be >= 1");
    if (run.rmax > run.rpeak) throw ValidationError(context + ": rmax exceeds rpeak");
    runs.push_back(run);
  }
  return runs;
}

}  // namespace fabricbench
