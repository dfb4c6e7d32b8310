#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cdrm/cdrm.hpp"
#include "cdrm/data.hpp"
#include "cdrm/inference.hpp"

namespace cdrm {

struct ScoredProbe {
  Vector input;
  double score = 0.0;
  bool label = false;
};

// Mann-Whitney statistic; ties count one half. Needs both classes.
double auroc(const std::vector<ScoredProbe>& probes);

// Step-wise area under the precision-recall curve, sweeping thresholds in
// descending score order with tied scores entering together.
double auprc(const std::vector<ScoredProbe>& probes);

struct RoomProbe {
  double x = 0.0;
  double y = 0.0;
  RegionLabel label = RegionLabel::kClean;
  std::optional<double> au;
  double eu = 1.0;
  std::size_t valid_count = 0;
  std::optional<double> prediction;
};

struct RoomMetrics {
  double au_auroc = 0.0;
  double au_auprc = 0.0;
  double eu_auroc = 0.0;
  double eu_auprc = 0.0;
};

struct RoomEvaluation {
  RoomMetrics metrics;
  std::vector<RoomProbe> probes;  // row-major over the grid
};

// Scores one probe position, filling au / eu / valid_count / prediction.
using ProbeScorer = std::function<void(std::size_t index, RoomProbe& probe)>;

inline constexpr int kDefaultGridResolution = 40;

// Probes the centres of a resolution x resolution grid over the room.
// Probes with no AU score 0 for the AU classifier. Scoring fans out over
// worker threads; results do not depend on the thread count.
RoomEvaluation evaluate_room(const ProbeScorer& scorer, const RoomLayout& layout,
                             int grid_resolution);

// CDRM scorer: probe i runs infer() with seed derived from (seed, i).
RoomEvaluation evaluate_room(const CdrmModel& model, const RoomLayout& layout,
                             int grid_resolution, const InferenceConfig& cfg,
                             std::uint64_t seed);

}  // namespace cdrm
