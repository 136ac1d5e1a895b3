#include "star/manifest.hpp"

#include <cstdlib>
#include <ctime>
#include <filesystem>

#include "star/binio.hpp"
#include "star/error.hpp"
#include "star/hash.hpp"

namespace star {

using nlohmann::json;

std::string manifest_path_for(const std::string& artifact_path) {
  return artifact_path + ".manifest.json";
}

std::string manifest_timestamp() {
  if (const char* fixed = std::getenv("STAR_TIMESTAMP")) {
    return fixed;
  }
  std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

std::string sha256_file_hex(const std::string& path) {
  return to_hex(sha256(read_file(path)));
}

void save_manifest(const RunManifest& manifest, const std::string& path) {
  json body;
  body["format"] = "star-manifest";
  body["version"] = 1;
  body["command"] = manifest.command;
  body["tool_version"] = manifest.tool_version;
  body["seed"] = manifest.seed;
  body["created_at"] = manifest.created_at;
  body["config"] = manifest.config;
  body["inputs"] = manifest.inputs;
  body["outputs"] = manifest.outputs;
  atomic_write_file(path, body.dump(2) + "\n");
}

RunManifest load_manifest(const std::string& path) {
  json body;
  try {
    body = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw IntegrityError("manifest " + path + " is not valid JSON: " + e.what());
  }
  try {
    if (body.at("format") != "star-manifest") {
      throw IntegrityError("manifest " + path + " has an unexpected format tag");
    }
    if (body.at("version") != 1) {
      throw IntegrityError("manifest " + path + " has an unsupported version");
    }
    RunManifest manifest;
    manifest.command = body.at("command").get<std::string>();
    manifest.tool_version = body.at("tool_version").get<std::string>();
    manifest.seed = body.at("seed").get<uint64_t>();
    manifest.created_at = body.at("created_at").get<std::string>();
    manifest.config = body.at("config");
    manifest.inputs =
        body.at("inputs").get<std::map<std::string, std::string>>();
    manifest.outputs =
        body.at("outputs").get<std::map<std::string, std::string>>();
    return manifest;
  } catch (const json::exception& e) {
    throw IntegrityError("manifest " + path + " is malformed: " + e.what());
  }
}

void verify_artifact_against_manifest(const std::string& artifact_path,
                                      const std::string& label) {
  std::string manifest_path = manifest_path_for(artifact_path);
  if (!std::filesystem::exists(manifest_path)) return;
  RunManifest manifest = load_manifest(manifest_path);
  auto it = manifest.outputs.find(label);
  if (it == manifest.outputs.end()) {
    throw IntegrityError("manifest " + manifest_path + " records no '" +
                         label + "' output for " + artifact_path);
  }
  std::string actual = sha256_file_hex(artifact_path);
  if (actual != it->second) {
    throw IntegrityError(artifact_path + " does not match its manifest " +
                         manifest_path + ": recorded sha256 " + it->second +
                         ", found " + actual);
  }
}

}  // namespace star
