#include "adgraph/manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include <json.hpp>

#include "adgraph/error.hpp"
#include "adgraph/io.hpp"

namespace adgraph {

std::string sha256_hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(io::read_file(path)); }

std::filesystem::path manifest_path(const std::filesystem::path& work_dir, std::string_view stage) {
  return work_dir / "manifests" / (std::string(stage) + ".json");
}

namespace {

nlohmann::ordered_json hashes_to_json(const std::vector<ArtifactHash>& hs) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& h : hs) {
    nlohmann::ordered_json o;
    o["path"] = h.path;
    o["sha256"] = h.sha256;
    arr.push_back(std::move(o));
  }
  return arr;
}

std::vector<ArtifactHash> hashes_from_json(const nlohmann::json& arr) {
  std::vector<ArtifactHash> out;
  for (const auto& o : arr) out.push_back({o.at("path").get<std::string>(), o.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

std::string manifest_to_json(const StageManifest& m) {
  nlohmann::ordered_json j;
  j["stage"] = m.stage;
  j["version"] = m.version;
  j["config_sha256"] = m.config_sha256;
  j["inputs"] = hashes_to_json(m.inputs);
  j["outputs"] = hashes_to_json(m.outputs);
  return j.dump(2) + "\n";
}

StageManifest manifest_from_json(std::string_view json_text) {
  try {
    const auto j = nlohmann::json::parse(json_text);
    return {j.at("stage").get<std::string>(), j.at("version").get<std::string>(),
            j.at("config_sha256").get<std::string>(), hashes_from_json(j.at("inputs")),
            hashes_from_json(j.at("outputs"))};
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& work_dir, const StageManifest& m) {
  io::write_file(manifest_path(work_dir, m.stage), manifest_to_json(m));
}

std::optional<StageManifest> read_manifest(const std::filesystem::path& work_dir, std::string_view stage) {
  const auto path = manifest_path(work_dir, stage);
  if (!std::filesystem::exists(path)) return std::nullopt;
  return manifest_from_json(io::read_file(path));
}

}  // namespace adgraph
