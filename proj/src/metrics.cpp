#include "cdrm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cdrm/error.hpp"
#include "cdrm/kde.hpp"
#include "cdrm/parallel.hpp"
#include "cdrm/random.hpp"

namespace cdrm {

namespace {

std::vector<std::size_t> order_by_score(const std::vector<ScoredProbe>& probes,
                                        bool descending) {
  for (const auto& p : probes) {
    if (!std::isfinite(p.score)) throw InvalidInput("probe score is not finite");
  }
  std::vector<std::size_t> idx(probes.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return descending ? probes[a].score > probes[b].score
                      : probes[a].score < probes[b].score;
  });
  return idx;
}

}  // namespace

double auroc(const std::vector<ScoredProbe>& probes) {
  const auto idx = order_by_score(probes, /*descending=*/false);
  std::uint64_t n_pos = 0;
  std::uint64_t n_neg = 0;
  // Twice the Mann-Whitney U, kept integral so the result is exact.
  std::uint64_t twice_u = 0;
  for (std::size_t g = 0; g < idx.size();) {
    std::size_t end = g;
    std::uint64_t pos = 0;
    std::uint64_t neg = 0;
    while (end < idx.size() && probes[idx[end]].score == probes[idx[g]].score) {
      (probes[idx[end]].label ? pos : neg) += 1;
      ++end;
    }
    twice_u += 2 * pos * n_neg + pos * neg;
    n_pos += pos;
    n_neg += neg;
    g = end;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw UndefinedMetric("AUROC needs at least one positive and one negative");
  }
  return static_cast<double>(twice_u) / (2.0 * static_cast<double>(n_pos) *
                                         static_cast<double>(n_neg));
}

double auprc(const std::vector<ScoredProbe>& probes) {
  const auto idx = order_by_score(probes, /*descending=*/true);
  const auto n_pos = static_cast<std::uint64_t>(
      std::count_if(probes.begin(), probes.end(), [](const auto& p) { return p.label; }));
  if (n_pos == 0) throw UndefinedMetric("AUPRC needs at least one positive");

  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  long double area = 0.0L;  // sum of (recall gain * precision) * n_pos
  for (std::size_t g = 0; g < idx.size();) {
    std::size_t end = g;
    std::uint64_t gained = 0;
    while (end < idx.size() && probes[idx[end]].score == probes[idx[g]].score) {
      if (probes[idx[end]].label) {
        ++gained;
      } else {
        ++fp;
      }
      ++end;
    }
    tp += gained;
    if (gained > 0) {
      area += static_cast<long double>(gained) * static_cast<long double>(tp) /
              static_cast<long double>(tp + fp);
    }
    g = end;
  }
  return static_cast<double>(area / static_cast<long double>(n_pos));
}

RoomEvaluation evaluate_room(const ProbeScorer& scorer, const RoomLayout& layout,
                             int grid_resolution) {
  if (grid_resolution < 1) throw InvalidInput("grid_resolution must be >= 1");
  layout.validate();

  RoomEvaluation eval;
  const auto n = static_cast<std::size_t>(grid_resolution);
  eval.probes.resize(n * n);
  const auto& room = layout.room;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      auto& p = eval.probes[r * n + c];
      p.x = room.x_low + (static_cast<double>(c) + 0.5) / grid_resolution *
                             (room.x_high - room.x_low);
      p.y = room.y_low + (static_cast<double>(r) + 0.5) / grid_resolution *
                             (room.y_high - room.y_low);
      p.label = label_probe(layout, p.x, p.y);
    }
  }

  parallel_for(eval.probes.size(), [&](std::size_t i) { scorer(i, eval.probes[i]); });

  std::vector<ScoredProbe> au_probes;
  std::vector<ScoredProbe> eu_probes;
  au_probes.reserve(eval.probes.size());
  eu_probes.reserve(eval.probes.size());
  for (const auto& p : eval.probes) {
    Vector in(2);
    in << p.x, p.y;
    au_probes.push_back({in, p.au.value_or(0.0), p.label == RegionLabel::kAuPositive});
    eu_probes.push_back({in, p.eu, p.label == RegionLabel::kEuPositive});
  }
  eval.metrics.au_auroc = auroc(au_probes);
  eval.metrics.au_auprc = auprc(au_probes);
  eval.metrics.eu_auroc = auroc(eu_probes);
  eval.metrics.eu_auprc = auprc(eu_probes);
  return eval;
}

RoomEvaluation evaluate_room(const CdrmModel& model, const RoomLayout& layout,
                             int grid_resolution, const InferenceConfig& cfg,
                             std::uint64_t seed) {
  if (model.layout.condition_dim() != 2) {
    throw InvalidInput("room evaluation needs a model over 2-D coordinates");
  }
  if (!model.kde) throw UnpreparedModel("model has no fitted KDE statistics");
  cfg.validate();
  auto scorer = [&](std::size_t i, RoomProbe& p) {
    Vector cond(2);
    cond << p.x, p.y;
    const auto r = infer(model, cond, cfg, derive_seed(seed, i));
    p.au = r.au;
    p.eu = r.eu;
    p.valid_count = r.valid_count;
    if (r.prediction) p.prediction = (*r.prediction)(0);
  };
  return evaluate_room(scorer, layout, grid_resolution);
}

}  // namespace cdrm
