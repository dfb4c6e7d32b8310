#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "cdrm/cdrm.hpp"

namespace cdrm {

inline constexpr int kModelSchemaVersion = 1;
inline constexpr int kSelfCheckProbes = 16;

struct ModelProvenance {
  std::string config_hash;
  std::uint64_t seed = 0;
  int epochs = 0;
};

struct ModelFile {
  CdrmModel model;
  ModelProvenance provenance;
};

// Serialises the model, its KDE statistics and a self-check battery of
// probe tuples with their scores.
nlohmann::json model_to_json(const ModelFile& file);

// Throws ParseError on malformed content, UnsupportedVersion on an unknown
// schema_version, and Error when the self-check scores do not reproduce
// bit-exactly.
ModelFile model_from_json(const nlohmann::json& j);

void save_model(const ModelFile& file, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

// FNV-1a over the bytes of s, as 16 hex digits.
std::string fnv1a_hex(const std::string& s);

}  // namespace cdrm
