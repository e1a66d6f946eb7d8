#include "fabricbench/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "fabricbench/errors.hpp"
#include "fabricbench/util.hpp"

namespace fabricbench {

long Histogram::total() const {
  long t = underflow + overflow;
  for (long c : counts) t += c;
  return t;
}

namespace {

void bin_values(const std::vector<double>& values, Histogram& hist) {
  const std::size_t bins = hist.counts.size();
  const double lo = hist.bin_edges.front();
  const double hi = hist.bin_edges.back();
  for (double v : values) {
    if (v < lo) {
      ++hist.underflow;
      continue;
    }
    if (v > hi) {
      ++hist.overflow;
      continue;
    }
    if (v == hi) {  // last bin is closed on the right
      ++hist.counts[bins - 1];
      continue;
    }
    // Binary search keeps explicit (possibly non-uniform) edges exact.
    const auto it = std::upper_bound(hist.bin_edges.begin(), hist.bin_edges.end(), v);
    const std::size_t idx = static_cast<std::size_t>(it - hist.bin_edges.begin()) - 1;
    ++hist.counts[std::min(idx, bins - 1)];
  }
}

}  // namespace

Histogram build_histogram(const std::vector<double>& values, int bin_count) {
  if (values.empty()) throw ValidationError("build_histogram: empty input");
  if (bin_count < 1) throw ValidationError("build_histogram: bin count must be >= 1");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  Histogram hist;
  hist.bin_edges.resize(bin_count + 1);
  const double width = (hi - lo) / bin_count;
  for (int i = 0; i <= bin_count; ++i) hist.bin_edges[i] = lo + width * i;
  hist.bin_edges[bin_count] = hi;  // exact upper edge, no rounding drift
  hist.counts.assign(bin_count, 0);
  if (width == 0) {
    // Degenerate range: everything lands in the first bin.
    hist.counts[0] = static_cast<long>(values.size());
    return hist;
  }
  bin_values(values, hist);
  return hist;
}

Histogram build_histogram(const std::vector<double>& values, const std::vector<double>& edges) {
  if (values.empty()) throw ValidationError("build_histogram: empty input");
  if (edges.size() < 2) throw ValidationError("build_histogram: need at least 2 edges");
  if (!std::is_sorted(edges.begin(), edges.end())) {
    throw ValidationError("build_histogram: edges must be ascending");
  }
  Histogram hist;
  hist.bin_edges = edges;
  hist.counts.assign(edges.size() - 1, 0);
  bin_values(values, hist);
  return hist;
}

std::string histogram_to_text(const Histogram& hist) {
  std::ostringstream out;
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double center = 0.5 * (hist.bin_edges[i] + hist.bin_edges[i + 1]);
    out << format_double(center) << ' ' << hist.counts[i] << '\n';
  }
  return out.str();
}

LinkStats summarize(const BandwidthMatrix& matrix) {
  if (matrix.entries.empty()) throw ValidationError("empty matrix");
  const std::vector<double> values = matrix.bandwidths();
  LinkStats stats;
  stats.mean = mean_of(values);
  stats.stddev = population_stddev(values);
  stats.min = *std::min_element(values.begin(), values.end());
  stats.max = *std::max_element(values.begin(), values.end());
  stats.n = static_cast<long>(values.size());
  if (stats.n >= 3) stats.outliers = detect_failing_links(matrix, 4.0);
  return stats;
}

std::vector<OutlierPair> detect_failing_links(const BandwidthMatrix& matrix, double k) {
  if (matrix.entries.size() < 3) {
    throw ValidationError("detect_failing_links: too few pairs (need >= 3)");
  }
  const std::vector<double> values = matrix.bandwidths();
  const double mu = mean_of(values);
  const double sigma = population_stddev(values);
  std::vector<OutlierPair> flagged;
  if (sigma == 0) return flagged;
  const double cutoff = mu - k * sigma;
  for (const PairEntry& e : matrix.entries) {
    if (e.bandwidth_gbps < cutoff) flagged.push_back({e.src, e.dst, e.bandwidth_gbps});
  }
  return flagged;
}

ContentionReport compare_modes(const BandwidthMatrix& serial, const BandwidthMatrix& parallel,
                               double threshold) {
  auto key_set = [](const BandwidthMatrix& m) {
    std::set<std::string> s;
    for (const PairEntry& e : m.entries) {
      s.insert(e.src);
      s.insert(e.dst);
    }
    return s;
  };
  if (key_set(serial) != key_set(parallel)) {
    throw ValidationError("compare_modes: matrices cover different node sets");
  }
  if (serial.msg_size && parallel.msg_size && *serial.msg_size != *parallel.msg_size) {
    throw ValidationError("compare_modes: matrices use different message sizes");
  }

  ContentionReport report;
  report.threshold = threshold;
  for (const PairEntry& s : serial.entries) {
    const PairEntry* p = parallel.find(s.src, s.dst);
    if (p == nullptr) {
      throw ValidationError("compare_modes: pair " + s.src + "-" + s.dst + " missing from parallel matrix");
    }
    PairRatio r;
    r.src = s.src;
    r.dst = s.dst;
    r.serial_gbps = s.bandwidth_gbps;
    r.parallel_gbps = p->bandwidth_gbps;
    r.ratio = s.bandwidth_gbps > 0 ? p->bandwidth_gbps / s.bandwidth_gbps : 0.0;
    report.pairs.push_back(r);
  }
  if (parallel.entries.size() != serial.entries.size()) {
    throw ValidationError("compare_modes: matrices have different pair counts");
  }

  std::vector<double> ratios;
  for (const PairRatio& r : report.pairs) {
    ratios.push_back(r.ratio);
    if (r.ratio < threshold) report.contended.push_back(r);
  }
  std::sort(report.contended.begin(), report.contended.end(),
            [](const PairRatio& a, const PairRatio& b) { return a.ratio < b.ratio; });
  report.mean_ratio = mean_of(ratios);
  report.serial_stddev = population_stddev(serial.bandwidths());
  report.parallel_stddev = population_stddev(parallel.bandwidths());
  return report;
}

}  // namespace fabricbench
