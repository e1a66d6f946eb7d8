#include "fabricbench/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>

#include "fabricbench/errors.hpp"
#include "fabricbench/util.hpp"

namespace fabricbench {

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

void RunManifest::record_input(const std::string& path, const std::string& bytes) {
  inputs.push_back({path, sha256_hex(bytes)});
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "fabricbench";
  j["version"] = kToolVersion;
  j["timestamp"] = utc_timestamp();
  j["subcommand"] = subcommand;
  j["config"] = config.is_null() ? nlohmann::ordered_json::object() : config;
  nlohmann::ordered_json ins = nlohmann::ordered_json::array();
  for (const InputDigest& d : inputs) {
    ins.push_back({{"path", d.path}, {"sha256", d.sha256}});
  }
  j["inputs"] = ins;
  return j;
}

std::string report_json(const RunManifest& manifest, const nlohmann::ordered_json& data) {
  nlohmann::ordered_json doc;
  doc["manifest"] = manifest.to_json();
  doc["data"] = data;
  return doc.dump(2) + "\n";
}

void emit_json_report(const RunManifest& manifest, const nlohmann::ordered_json& data,
                      const std::string& path) {
  write_file(path, report_json(manifest, data));
}

void emit_csv_report(const RunManifest& manifest, const std::string& csv, const std::string& path) {
  write_file(path, csv);
  nlohmann::ordered_json doc;
  doc["manifest"] = manifest.to_json();
  write_file(path + ".manifest.json", doc.dump(2) + "\n");
}

}  // namespace fabricbench
