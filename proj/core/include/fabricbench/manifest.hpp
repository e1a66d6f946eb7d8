#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace fabricbench {

inline constexpr const char* kToolVersion = "0.1.0";

struct InputDigest {
  std::string path;
  std::string sha256;  // of the exact bytes read
};

// Emitted with every report: JSON reports embed it under "manifest", CSV
// outputs get a sibling <path>.manifest.json. The timestamp is the only
// non-deterministic field.
struct RunManifest {
  std::string subcommand;
  nlohmann::ordered_json config;
  std::vector<InputDigest> inputs;

  void record_input(const std::string& path, const std::string& bytes);
  nlohmann::ordered_json to_json() const;
};

std::string sha256_hex(const std::string& bytes);

// data + manifest as a deterministically ordered JSON document.
std::string report_json(const RunManifest& manifest, const nlohmann::ordered_json& data);

void emit_json_report(const RunManifest& manifest, const nlohmann::ordered_json& data,
                      const std::string& path);
// Writes the CSV verbatim plus <path>.manifest.json.
void emit_csv_report(const RunManifest& manifest, const std::string& csv, const std::string& path);

}  // namespace fabricbench
