#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace cprlab::manifest {

// Reproducibility record written next to every command's outputs. The
// config_hash digests the effective parameters only (never timestamps), so
// reruns with identical arguments hash identically.
struct RunManifest {
  std::string command;
  std::string config_hash;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> input_paths;
  std::vector<std::string> output_paths;
  std::string tool_version;
  std::string started_at;
  std::string finished_at;
};

// `details_json`, when non-empty, must be a JSON object; it is embedded under
// the "details" key (used e.g. for training history).
std::string manifest_to_json(const RunManifest& m,
                             const std::string& details_json = "");

void write_manifest(const std::string& path, const RunManifest& m,
                    const std::string& details_json = "");

// FNV-1a digest of a canonical (sorted-key) dump of a JSON parameter object.
std::string config_hash(const std::string& params_json);

}  // namespace cprlab::manifest
