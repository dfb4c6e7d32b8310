#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <json.hpp>

#include "cdrm/cdrm.hpp"
#include "cdrm/data.hpp"
#include "cdrm/inference.hpp"
#include "cdrm/kde.hpp"
#include "cdrm/metrics.hpp"

namespace cdrm {

// Everything a CLI run can be configured with. Loaded from JSON; unknown
// keys are rejected at every level.
struct RunConfig {
  std::uint64_t seed = 0;
  std::vector<int> hidden_dims = kDefaultHiddenDims;
  TrainConfig train;
  InferenceConfig inference;
  BandwidthRule bandwidth;
  RoomLayout layout;
  int toy_per_region = kDefaultToyPerRegion;
  double toy_sigma_eta = kDefaultSigmaEta;
  int room_steps = 5000;
  double room_walk_step = kDefaultWalkStep;
  int grid_resolution = kDefaultGridResolution;

  // Throws InvalidInput on the first invalid field.
  void validate() const;
};

// Missing keys keep their defaults. Throws InvalidInput on unknown keys or
// wrong types.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace cdrm
