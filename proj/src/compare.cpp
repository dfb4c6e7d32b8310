#include "cdrm/compare.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>

#include "cdrm/error.hpp"
#include "cdrm/kde.hpp"
#include "cdrm/random.hpp"

namespace cdrm {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

TransitionDataset bench_dataset(int n, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x62656e6368ULL));
  TransitionDataset ds;
  ds.dims = {1, 1, 1};
  for (int i = 0; i < n; ++i) {
    Transition t;
    t.s = Vector::Constant(1, uniform(rng, -1.0, 1.0));
    t.a = Vector::Constant(1, uniform(rng, -1.0, 1.0));
    t.s_next = Vector::Constant(
        1, 0.8 * t.s(0) + 0.3 * t.a(0) + 0.05 * standard_normal(rng));
    ds.tuples.push_back(std::move(t));
  }
  ds.bounds = padded_bounds(ds.dims, ds.tuples);
  return ds;
}

std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

}  // namespace

std::size_t OracleReport::agreements() const {
  return static_cast<std::size_t>(
      std::count_if(probes.begin(), probes.end(), [](const auto& p) { return p.agree(); }));
}

double OracleReport::agreement_rate() const {
  return probes.empty() ? 0.0
                        : static_cast<double>(agreements()) /
                              static_cast<double>(probes.size());
}

OracleReport oracle_agreement(const CdrmModel& model, const TransitionDataset& dataset,
                              int bins, int n_probes, const InferenceConfig& cfg,
                              std::uint64_t seed) {
  if (dataset.dims.condition_dim() != 1) {
    throw InvalidInput("oracle agreement needs a 1-D condition");
  }
  if (dataset.dims != model.layout) {
    throw InvalidInput("dataset dims do not match the model layout");
  }
  if (dataset.empty()) throw InvalidInput("oracle agreement needs data");
  if (n_probes < 2) throw InvalidInput("oracle agreement needs >= 2 probes");

  const BinGrid grid = BinGrid::build(dataset, bins, dataset.bounds);
  double lo = dataset.tuples.front().condition()(0);
  double hi = lo;
  for (const auto& t : dataset.tuples) {
    lo = std::min(lo, t.condition()(0));
    hi = std::max(hi, t.condition()(0));
  }

  OracleReport report;
  for (int i = 0; i < n_probes; ++i) {
    OracleProbe p;
    p.x = lo + (hi - lo) * i / (n_probes - 1);
    const Vector cond = Vector::Constant(1, p.x);
    p.cdrm_valid = infer(model, cond, cfg, derive_seed(seed, static_cast<std::uint64_t>(i)))
                       .valid_count;
    p.bin_cells = query(grid, cond).size();
    report.probes.push_back(p);
  }
  return report;
}

std::vector<BenchRow> run_bench(const BenchConfig& cfg) {
  if (cfg.reps < 1 || cfg.samples < 1 || cfg.bin_queries < 1 || cfg.dataset_size < 2) {
    throw InvalidInput("bench counts must be positive");
  }
  const TransitionDataset ds = bench_dataset(cfg.dataset_size, cfg.seed);
  const Matrix conditions = ds.condition_matrix();

  CdrmModel model = CdrmModel::create(ds.dims, ds.bounds, cfg.hidden_dims, cfg.seed);
  model.kde = fit(conditions, BandwidthRule::median(), cfg.seed);

  // CDRM timing depends only on L.
  std::vector<double> cdrm_ns;
  for (int steps : cfg.steps) {
    InferenceConfig ic;
    ic.n_samples = cfg.samples;
    ic.steps = steps;
    std::vector<double> times;
    for (int r = 0; r < cfg.reps; ++r) {
      const Vector cond = conditions.col(r % conditions.cols());
      const auto t0 = Clock::now();
      const auto res = infer(model, cond, ic, derive_seed(cfg.seed, static_cast<std::uint64_t>(r)));
      const auto t1 = Clock::now();
      (void)res;
      times.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count());
    }
    cdrm_ns.push_back(median(std::move(times)));
  }

  std::vector<BenchRow> rows;
  for (int b : cfg.bins) {
    const BinGrid grid = BinGrid::build(ds, b, ds.bounds);
    std::vector<double> times;
    volatile std::size_t sink = 0;
    for (int r = 0; r < cfg.reps; ++r) {
      const auto t0 = Clock::now();
      for (int q = 0; q < cfg.bin_queries; ++q) {
        const auto res = bin_infer(grid, conditions.col(q % conditions.cols()));
        sink = sink + res.valid_count;
      }
      const auto t1 = Clock::now();
      times.push_back(std::chrono::duration<double, std::nano>(t1 - t0).count() /
                      cfg.bin_queries);
    }
    const double bin_ns = median(std::move(times));
    for (std::size_t k = 0; k < cfg.steps.size(); ++k) {
      BenchRow row;
      row.bins = b;
      row.state_dim = ds.dims.state_dim;
      row.action_dim = ds.dims.action_dim;
      row.steps = cfg.steps[k];
      row.weights = model.net.param_count();
      row.cdrm_ns = cdrm_ns[k];
      row.bin_ns = bin_ns;
      row.memory = memory_report(ds.dims.state_dim, ds.dims.action_dim, b);
      rows.push_back(row);
    }
  }
  return rows;
}

void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out) {
  out << "b,d_s,d_a,L,W,cdrm_ns,bin_ns,joint_cells,paper_formula_cells\n";
  for (const auto& r : rows) {
    out << r.bins << ',' << r.state_dim << ',' << r.action_dim << ',' << r.steps << ','
        << r.weights << ',' << fixed1(r.cdrm_ns) << ',' << fixed1(r.bin_ns) << ','
        << r.memory.joint_cells
        << (r.memory.joint_saturated ? "+" : "") << ',' << r.memory.flag_formula_cells
        << (r.memory.formula_saturated ? "+" : "") << '\n';
  }
}

}  // namespace cdrm
