#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "cdrm/binref.hpp"
#include "cdrm/cdrm.hpp"
#include "cdrm/inference.hpp"

namespace cdrm {

// CDRM valid-set emptiness against bin-query emptiness on a probe grid over
// a 1-D condition.
struct OracleProbe {
  double x = 0.0;
  std::size_t cdrm_valid = 0;
  std::size_t bin_cells = 0;
  bool agree() const { return (cdrm_valid > 0) == (bin_cells > 0); }
};

struct OracleReport {
  std::vector<OracleProbe> probes;
  std::size_t agreements() const;
  double agreement_rate() const;
};

// Probes n_probes evenly spaced points spanning the dataset's condition
// range. Needs condition_dim() == 1 and a model with KDE statistics.
OracleReport oracle_agreement(const CdrmModel& model, const TransitionDataset& dataset,
                              int bins, int n_probes, const InferenceConfig& cfg,
                              std::uint64_t seed);

struct BenchConfig {
  std::vector<int> bins = {1, 8, 64, 256};
  std::vector<int> steps = {1, 10, 50};
  int reps = 5;
  int samples = 64;             // Langevin batch size for the CDRM path
  int bin_queries = 2000;       // queries per timed bin repetition
  int dataset_size = 2000;
  std::vector<int> hidden_dims = kDefaultHiddenDims;
  std::uint64_t seed = 0;
};

struct BenchRow {
  int bins = 0;
  int state_dim = 0;
  int action_dim = 0;
  int steps = 0;
  long weights = 0;
  double cdrm_ns = 0.0;  // median per inference
  double bin_ns = 0.0;   // median per bin_infer
  MemoryReport memory;
};

// Synthetic (s, a, s') data with d_s = d_a = 1; one row per (bins, steps)
// pair in sweep order.
std::vector<BenchRow> run_bench(const BenchConfig& cfg);

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

}  // namespace cdrm
