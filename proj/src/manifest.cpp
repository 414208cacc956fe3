#include "cprlab/manifest.hpp"

#include "cprlab/common.hpp"
#include "cprlab/ioutil.hpp"
#include "json.hpp"

namespace cprlab::manifest {

namespace {
using nlohmann::json;
}

std::string manifest_to_json(const RunManifest& m,
                             const std::string& details_json) {
  json j;
  j["command"] = m.command;
  j["config_hash"] = m.config_hash;
  j["seeds"] = m.seeds;
  j["input_paths"] = m.input_paths;
  j["output_paths"] = m.output_paths;
  j["tool_version"] = m.tool_version;
  j["timestamps"] = {{"started", m.started_at}, {"finished", m.finished_at}};
  if (!details_json.empty()) {
    try {
      j["details"] = json::parse(details_json);
    } catch (const json::parse_error& e) {
      throw InvalidInput(std::string("manifest details must be JSON: ") +
                         e.what());
    }
  }
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& path, const RunManifest& m,
                    const std::string& details_json) {
  ioutil::atomic_write_file(path, manifest_to_json(m, details_json));
}

std::string config_hash(const std::string& params_json) {
  json j;
  try {
    j = json::parse(params_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInput(std::string("config_hash input must be JSON: ") +
                       e.what());
  }
  // nlohmann objects iterate in sorted key order, so dump() is canonical.
  return ioutil::fnv1a_hex(j.dump());
}

}  // namespace cprlab::manifest
