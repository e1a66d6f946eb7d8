#pragma once

#include <string>
#include <vector>

#include "fabricbench/bandwidth_matrix.hpp"

namespace fabricbench {

struct Histogram {
  std::vector<double> bin_edges;  // ascending, one more than counts
  std::vector<long> counts;       // bins are right-open except the last
  long underflow = 0;
  long overflow = 0;

  long total() const;
};

Histogram build_histogram(const std::vector<double>& values, int bin_count);
Histogram build_histogram(const std::vector<double>& values, const std::vector<double>& edges);

// Two-column text (bin center, count), plottable directly.
std::string histogram_to_text(const Histogram& hist);

struct OutlierPair {
  std::string src;
  std::string dst;
  double bandwidth_gbps = 0;
};

struct LinkStats {
  double mean = 0;
  double stddev = 0;  // population
  double min = 0;
  double max = 0;
  long n = 0;
  std::vector<OutlierPair> outliers;
};

// Mean / population sigma / extrema over all pair bandwidths. Outliers are
// populated via detect_failing_links(k=4) when the matrix has >= 3 pairs.
LinkStats summarize(const BandwidthMatrix& matrix);

// Pairs with bandwidth < mean - k*sigma. A zero-sigma matrix flags nothing.
std::vector<OutlierPair> detect_failing_links(const BandwidthMatrix& matrix, double k = 4.0);

struct PairRatio {
  std::string src;
  std::string dst;
  double serial_gbps = 0;
  double parallel_gbps = 0;
  double ratio = 0;  // parallel / serial
};

struct ContentionReport {
  std::vector<PairRatio> pairs;       // every pair, generation order
  std::vector<PairRatio> contended;   // ratio < threshold, ascending by ratio
  double mean_ratio = 0;
  double serial_stddev = 0;
  double parallel_stddev = 0;
  double threshold = 0.8;
};

ContentionReport compare_modes(const BandwidthMatrix& serial, const BandwidthMatrix& parallel,
                               double threshold = 0.8);

}  // namespace fabricbench
