#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

namespace star {

inline constexpr const char* kToolVersion = "1.0.0";

// Provenance record written next to every artifact as
// <artifact>.manifest.json. Consumers that find a manifest verify the
// artifact's bytes against it, which turns a stale or swapped file into a
// hard error instead of silently wrong numbers.
struct RunManifest {
  std::string command;
  std::string tool_version = kToolVersion;
  uint64_t seed = 0;
  std::string created_at;              // STAR_TIMESTAMP when set, else UTC now
  nlohmann::json config;               // resolved settings for the command
  std::map<std::string, std::string> inputs;   // label -> sha256 of file bytes
  std::map<std::string, std::string> outputs;  // label -> sha256 of file bytes
};

std::string manifest_path_for(const std::string& artifact_path);

// ISO-8601 UTC. The STAR_TIMESTAMP environment variable overrides the
// clock so repeated runs can be byte-compared end to end.
std::string manifest_timestamp();

std::string sha256_file_hex(const std::string& path);

void save_manifest(const RunManifest& manifest, const std::string& path);
RunManifest load_manifest(const std::string& path);

// If a manifest sits next to the artifact, checks that the artifact's
// current bytes match the hash recorded under `label`. A missing manifest
// passes (the artifact's own checksum still protects it); a mismatch or an
// unreadable manifest does not.
void verify_artifact_against_manifest(const std::string& artifact_path,
                                      const std::string& label);

}  // namespace star
