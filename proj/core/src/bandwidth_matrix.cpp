#include "fabricbench/bandwidth_matrix.hpp"

#include <set>
#include <sstream>

#include "fabricbench/errors.hpp"
#include "fabricbench/util.hpp"

namespace fabricbench {

std::vector<double> BandwidthMatrix::bandwidths() const {
  std::vector<double> out;
  out.reserve(entries.size());
  for (const PairEntry& e : entries) out.push_back(e.bandwidth_gbps);
  return out;
}

const PairEntry* BandwidthMatrix::find(const std::string& src, const std::string& dst) const {
  for (const PairEntry& e : entries) {
    if ((e.src == src && e.dst == dst) || (e.src == dst && e.dst == src)) return &e;
  }
  return nullptr;
}

std::string matrix_to_csv(const BandwidthMatrix& matrix) {
  std::ostringstream out;
  out << "# mode=" << matrix.mode << '\n';
  if (matrix.msg_size) out << "# msg_size=" << *matrix.msg_size << '\n';
  out << "# nodes=" << matrix.n << '\n';
  for (const FailedPair& f : matrix.failed) {
    out << "# failed=" << f.src << ';' << f.dst << ';' << f.reason << '\n';
  }
  out << "src,dst,bandwidth_gbps,time_s\n";
  for (const PairEntry& e : matrix.entries) {
    out << e.src << ',' << e.dst << ',' << format_double(e.bandwidth_gbps) << ','
        << format_double(e.time_s) << '\n';
  }
  return out.str();
}

BandwidthMatrix parse_matrix_csv(const std::string& text, const std::string& origin) {
  BandwidthMatrix matrix;
  bool header_seen = false;
  int lineno = 0;
  std::set<std::string> endpoints;
  for (const std::string& raw : split(text, '\n')) {
    ++lineno;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const std::size_t eq = body.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key == "mode") matrix.mode = value;
      else if (key == "msg_size") matrix.msg_size = static_cast<std::uint64_t>(std::stoull(value));
      else if (key == "failed") {
        const auto parts = split(value, ';');
        if (parts.size() >= 2) {
          matrix.failed.push_back({parts[0], parts[1], parts.size() > 2 ? parts[2] : ""});
        }
      }
      continue;
    }
    if (!header_seen) {
      if (line != "src,dst,bandwidth_gbps,time_s") {
        throw ValidationError(origin + ":" + std::to_string(lineno) +
                              ": expected header 'src,dst,bandwidth_gbps,time_s'");
      }
      header_seen = true;
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() != 4) {
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": expected 4 columns");
    }
    PairEntry e;
    e.src = trim(cells[0]);
    e.dst = trim(cells[1]);
    try {
      e.bandwidth_gbps = std::stod(cells[2]);
      e.time_s = std::stod(cells[3]);
    } catch (const std::exception&) {
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": malformed row '" + line + "'");
    }
    if (e.src == e.dst) {
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": diagonal entry " + e.src);
    }
    endpoints.insert(e.src);
    endpoints.insert(e.dst);
    matrix.entries.push_back(std::move(e));
  }
  if (!header_seen) throw ValidationError(origin + ": missing 'src,dst,bandwidth_gbps,time_s' header");
  for (const FailedPair& f : matrix.failed) {
    endpoints.insert(f.src);
    endpoints.insert(f.dst);
  }
  matrix.n = static_cast<int>(endpoints.size());
  return matrix;
}

BandwidthMatrix load_matrix_csv(const std::string& path) {
  return parse_matrix_csv(read_file(path), path);
}

}  // namespace fabricbench
