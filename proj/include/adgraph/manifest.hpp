#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adgraph {

std::string sha256_hex(std::string_view data);
/// Throws IoError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

struct ArtifactHash {
  std::string path;  // relative to the work directory for artifacts
  std::string sha256;
  bool operator==(const ArtifactHash&) const = default;
};

/// Written to `<work_dir>/manifests/<stage>.json` after a stage succeeds.
struct StageManifest {
  std::string stage;
  std::string version;
  std::string config_sha256;
  std::vector<ArtifactHash> inputs;
  std::vector<ArtifactHash> outputs;
  bool operator==(const StageManifest&) const = default;
};

std::filesystem::path manifest_path(const std::filesystem::path& work_dir, std::string_view stage);
std::string manifest_to_json(const StageManifest& m);
StageManifest manifest_from_json(std::string_view json_text);
void write_manifest(const std::filesystem::path& work_dir, const StageManifest& m);
std::optional<StageManifest> read_manifest(const std::filesystem::path& work_dir, std::string_view stage);

}  // namespace adgraph
