#include "fabricbench/util.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fabricbench/errors.hpp"

namespace fabricbench {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string format_fixed(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return std::string(buf);
}

std::uint64_t parse_size(const std::string& text) {
  std::string t = trim(text);
  if (t.empty()) throw ValidationError("empty size");
  std::size_t pos = 0;
  while (pos < t.size() && (std::isdigit(static_cast<unsigned char>(t[pos])) || t[pos] == '.')) ++pos;
  const std::string num = t.substr(0, pos);
  std::string suffix = trim(t.substr(pos));
  double value = 0;
  try {
    value = std::stod(num);
  } catch (const std::exception&) {
    throw ValidationError("bad size: '" + text + "'");
  }
  double mult = 1;
  if (suffix.empty() || suffix == "B") mult = 1;
  else if (suffix == "KiB") mult = 1024.0;
  else if (suffix == "MiB") mult = 1024.0 * 1024;
  else if (suffix == "GiB") mult = 1024.0 * 1024 * 1024;
  else if (suffix == "KB") mult = 1e3;
  else if (suffix == "MB") mult = 1e6;
  else if (suffix == "GB") mult = 1e9;
  else throw ValidationError("unknown size suffix: '" + suffix + "'");
  const double bytes = value * mult;
  if (bytes < 0 || bytes > 9e18) throw ValidationError("size out of range: '" + text + "'");
  return static_cast<std::uint64_t>(bytes + 0.5);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = text.find(sep, start);
    if (at == std::string::npos) {
      out.push_back(text.substr(start));
      break;
    }
    out.push_back(text.substr(start, at - start));
    start = at + 1;
  }
  return out;
}

std::string trim(const std::string& text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return text.substr(b, e - b);
}

double mean_of(const std::vector<double>& values) {
  if (values.empty()) throw ValidationError("mean of empty set");
  double sum = 0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double population_stddev(const std::vector<double>& values) {
  const double mu = mean_of(values);
  double acc = 0;
  for (double v : values) acc += (v - mu) * (v - mu);
  return std::sqrt(acc / static_cast<double>(values.size()));
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw ValidationError("median of empty set");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write file: " + path);
  out << contents;
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace fabricbench
