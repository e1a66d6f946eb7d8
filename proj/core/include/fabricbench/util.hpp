#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fabricbench {

// Shortest round-trip decimal form, locale-independent. All file output goes
// through this so identical inputs produce identical bytes.
std::string format_double(double value);

// Fixed-point form with `digits` decimals, for human-facing tables.
std::string format_fixed(double value, int digits);

// Parses sizes like "1048576", "64KiB", "1MiB", "2MB", "1GiB" into bytes.
// Decimal suffixes (KB/MB/GB) are powers of ten, binary ones powers of two.
std::uint64_t parse_size(const std::string& text);

std::vector<std::string> split(const std::string& text, char sep);
std::string trim(const std::string& text);

double mean_of(const std::vector<double>& values);
// Population standard deviation (divides by n).
double population_stddev(const std::vector<double>& values);
// Sorted-middle median; even-length inputs average the two middle values.
double median_of(std::vector<double> values);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

}  // namespace fabricbench
