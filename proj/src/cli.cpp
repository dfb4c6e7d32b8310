#include "cdrm/cli.hpp"

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cdrm/compare.hpp"
#include "cdrm/error.hpp"
#include "cdrm/metrics.hpp"
#include "cdrm/model_io.hpp"
#include "cdrm/run_config.hpp"

namespace cdrm {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

// "a,b,c" -> numbers. Throws InvalidInput on anything else.
std::vector<double> parse_vector(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = text.find(',', pos);
    const std::string tok =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    double v = 0.0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || r.ec != std::errc() || r.ptr != tok.data() + tok.size() ||
        !std::isfinite(v)) {
      throw InvalidInput("malformed vector '" + text + "'");
    }
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (double v : parse_vector(text)) {
    if (v != static_cast<int>(v) || v < 1) {
      throw InvalidInput("expected positive integers in '" + text + "'");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error("failed writing " + path);
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

// Options shared by several subcommands. Command-line values override the
// config file, which overrides the built-in defaults.
struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  CLI::Option* seed_opt = nullptr;

  void add(CLI::App* app) {
    app->add_option("--config", config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    seed_opt = app->add_option("--seed", seed, "random seed");
  }

  RunConfig load() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
    if (seed_opt->count()) cfg.seed = seed;
    return cfg;
  }
};

struct InferenceOverrides {
  int n_samples = 0;
  int steps = 0;
  double alpha = 0.0;
  CLI::Option* n_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;

  void add(CLI::App* app) {
    n_opt = app->add_option("--n-samples", n_samples, "Langevin chains per query");
    steps_opt = app->add_option("--steps", steps, "Langevin steps per query");
    alpha_opt = app->add_option("--alpha", alpha, "validity threshold");
  }

  void apply(InferenceConfig& cfg) const {
    if (n_opt->count()) cfg.n_samples = n_samples;
    if (steps_opt->count()) cfg.steps = steps;
    if (alpha_opt->count()) cfg.alpha = alpha;
    cfg.validate();
  }
};

// ---- gen -------------------------------------------------------------------

struct GenArgs {
  Common common;
  std::string out;
  int n_per_region = 0;
  double sigma_eta = 0.0;
  bool multimodal = false;
  int steps = 0;
  double walk_step = 0.0;
  CLI::Option* n_opt = nullptr;
  CLI::Option* sigma_opt = nullptr;
  CLI::Option* steps_opt = nullptr;
  CLI::Option* walk_opt = nullptr;
};

void write_dataset(const TransitionDataset& ds, const std::string& out, json meta,
                   std::ostream& os) {
  save_csv(ds, out);
  meta["rows"] = ds.size();
  meta["dims"] = {ds.dims.state_dim, ds.dims.action_dim, ds.dims.next_dim};
  write_text(out + ".meta.json", meta.dump(2) + "\n");
  os << "wrote " << ds.size() << " tuples to " << out << "\n";
}

int cmd_gen_toy(const GenArgs& a, std::ostream& os) {
  RunConfig cfg = a.common.load();
  if (a.n_opt->count()) cfg.toy_per_region = a.n_per_region;
  if (a.sigma_opt->count()) cfg.toy_sigma_eta = a.sigma_eta;
  cfg.validate();
  const auto ds = gen_toy(cfg.toy_per_region, cfg.toy_sigma_eta, a.multimodal, cfg.seed);
  write_dataset(ds, a.out,
                {{"generator", "toy"},
                 {"seed", cfg.seed},
                 {"n_per_region", cfg.toy_per_region},
                 {"sigma_eta", cfg.toy_sigma_eta},
                 {"multimodal", a.multimodal}},
                os);
  return kExitOk;
}

int cmd_gen_room(const GenArgs& a, std::ostream& os) {
  RunConfig cfg = a.common.load();
  if (a.steps_opt->count()) cfg.room_steps = a.steps;
  if (a.walk_opt->count()) cfg.room_walk_step = a.walk_step;
  cfg.validate();
  const auto ds = gen_room(cfg.room_steps, cfg.layout, cfg.seed, cfg.room_walk_step);
  json meta = run_config_to_json(cfg)["layout"];
  write_dataset(ds, a.out,
                {{"generator", "room"},
                 {"seed", cfg.seed},
                 {"steps", cfg.room_steps},
                 {"walk_step", cfg.room_walk_step},
                 {"layout", meta}},
                os);
  return kExitOk;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  Common common;
  std::string data;
  std::string out;
  std::string trace;
  int epochs = 0;
  int steps_per_epoch = 0;
  double learning_rate = 0.0;
  std::string lr_schedule;
  std::string bandwidth;
  CLI::Option* epochs_opt = nullptr;
  CLI::Option* spe_opt = nullptr;
  CLI::Option* lr_opt = nullptr;
};

int cmd_train(const TrainArgs& a, std::ostream& os) {
  RunConfig cfg = a.common.load();
  if (a.epochs_opt->count()) cfg.train.epochs = a.epochs;
  if (a.spe_opt->count()) cfg.train.steps_per_epoch = a.steps_per_epoch;
  if (a.lr_opt->count()) cfg.train.learning_rate = a.learning_rate;
  if (a.lr_schedule == "cosine") cfg.train.lr_schedule = LrSchedule::kCosine;
  if (a.lr_schedule == "constant") cfg.train.lr_schedule = LrSchedule::kConstant;
  if (!a.bandwidth.empty()) {
    // Same spellings as config.kde.bandwidth.
    nlohmann::json bw = a.bandwidth;
    if (a.bandwidth != "median" && a.bandwidth != "scott") {
      const auto v = parse_vector(a.bandwidth);
      if (v.size() != 1) throw InvalidInput("--kde-bandwidth takes a single value");
      bw = v[0];
    }
    cfg = run_config_from_json(
        [&] { auto j = run_config_to_json(cfg); j["kde"]["bandwidth"] = bw; return j; }());
  }
  cfg.train.seed = cfg.seed;
  cfg.validate();

  const TransitionDataset ds = load_csv(a.data);
  if (ds.empty()) throw InvalidInput("dataset " + a.data + " is empty");

  CdrmModel model = CdrmModel::create(ds.dims, ds.bounds, cfg.hidden_dims, cfg.seed);
  TrainResult result = train(std::move(model), ds, cfg.train);
  result.model.kde = fit(ds.condition_matrix(), cfg.bandwidth, cfg.seed);

  ModelFile file{std::move(result.model), {}};
  file.provenance.config_hash = fnv1a_hex(run_config_to_json(cfg).dump());
  file.provenance.seed = cfg.seed;
  file.provenance.epochs = cfg.train.epochs;
  save_model(file, a.out);

  std::string trace = "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    trace += std::to_string(e + 1) + "," + num(result.epoch_loss[e]) + "\n";
  }
  write_text(a.trace.empty() ? a.out + ".loss.csv" : a.trace, trace);
  os << "trained " << cfg.train.epochs << " epochs on " << ds.size() << " tuples; wrote "
     << a.out << "\n";
  return kExitOk;
}

// ---- infer -----------------------------------------------------------------

struct InferArgs {
  Common common;
  InferenceOverrides overrides;
  std::string model;
  std::string query;
};

int cmd_infer(const InferArgs& a, std::ostream& os) {
  RunConfig cfg = a.common.load();
  a.overrides.apply(cfg.inference);
  const std::vector<double> q = parse_vector(a.query);
  const ModelFile file = load_model(a.model);
  if (static_cast<int>(q.size()) != file.model.layout.condition_dim()) {
    throw InvalidInput("query has " + std::to_string(q.size()) + " values, model expects " +
                       std::to_string(file.model.layout.condition_dim()));
  }
  const Vector cond = Eigen::Map<const Vector>(q.data(), static_cast<Eigen::Index>(q.size()));
  const InferenceResult r = infer(file.model, cond, cfg.inference, cfg.seed);

  json j;
  j["prediction"] = r.prediction ? vector_json(*r.prediction) : json(nullptr);
  j["eu"] = r.eu;
  j["au"] = r.au ? json(*r.au) : json(nullptr);
  j["valid_count"] = r.valid_count;
  os << j.dump() << "\n";
  return kExitOk;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  Common common;
  InferenceOverrides overrides;
  std::string model;
  std::string out;
  std::string probes;
  int grid = 0;
  bool oracle_stub = false;
  CLI::Option* grid_opt = nullptr;
};

std::string metrics_csv(const RoomMetrics& m) {
  return "method,au_auroc,au_auprc,eu_auroc,eu_auprc\nCDRM," + num(m.au_auroc) + "," +
         num(m.au_auprc) + "," + num(m.eu_auroc) + "," + num(m.eu_auprc) + "\n";
}

std::string probes_csv(const std::vector<RoomProbe>& probes) {
  std::string s = "x,y,label,au,eu,valid_count,prediction\n";
  for (const auto& p : probes) {
    const char* label = p.label == RegionLabel::kAuPositive   ? "au"
                        : p.label == RegionLabel::kEuPositive ? "eu"
                                                              : "clean";
    s += num(p.x) + "," + num(p.y) + "," + label + "," + (p.au ? num(*p.au) : "") + "," +
         num(p.eu) + "," + std::to_string(p.valid_count) + "," +
         (p.prediction ? num(*p.prediction) : "") + "\n";
  }
  return s;
}

int cmd_eval(const EvalArgs& a, std::ostream& os) {
  RunConfig cfg = a.common.load();
  if (a.grid_opt->count()) cfg.grid_resolution = a.grid;
  a.overrides.apply(cfg.inference);
  cfg.validate();

  RoomEvaluation ev;
  if (a.oracle_stub) {
    // Scores 1 exactly inside the true regions.
    const RoomLayout layout = cfg.layout;
    ev = evaluate_room(
        [&layout](std::size_t, RoomProbe& p) {
          p.au = layout.noisy_region.contains(p.x, p.y) ? 1.0 : 0.0;
          p.eu = layout.hidden_region.contains(p.x, p.y) ? 1.0 : 0.0;
        },
        layout, cfg.grid_resolution);
  } else {
    if (a.model.empty()) throw InvalidInput("--model is required unless --oracle-stub is set");
    const ModelFile file = load_model(a.model);
    ev = evaluate_room(file.model, cfg.layout, cfg.grid_resolution, cfg.inference, cfg.seed);
  }

  const std::string csv = metrics_csv(ev.metrics);
  if (!a.out.empty()) write_text(a.out, csv);
  if (!a.probes.empty()) write_text(a.probes, probes_csv(ev.probes));
  os << csv;
  return kExitOk;
}

// ---- oracle ----------------------------------------------------------------

struct OracleArgs {
  Common common;
  InferenceOverrides overrides;
  std::string model;
  std::string data;
  std::string out;
  int bins = 100;
  int probes = 50;
};

int cmd_oracle(const OracleArgs& a, std::ostream& os) {
  RunConfig cfg = a.common.load();
  a.overrides.apply(cfg.inference);
  if (a.bins < 1) throw InvalidInput("--bins must be >= 1");
  const ModelFile file = load_model(a.model);
  const TransitionDataset ds = load_csv(a.data);
  const OracleReport report =
      oracle_agreement(file.model, ds, a.bins, a.probes, cfg.inference, cfg.seed);

  if (!a.out.empty()) {
    std::string s = "x,cdrm_valid,bin_cells,agree\n";
    for (const auto& p : report.probes) {
      s += num(p.x) + "," + std::to_string(p.cdrm_valid) + "," + std::to_string(p.bin_cells) +
           "," + (p.agree() ? "1" : "0") + "\n";
    }
    write_text(a.out, s);
  }
  const json j = {{"bins", a.bins},
                  {"probes", report.probes.size()},
                  {"agreements", report.agreements()},
                  {"agreement_rate", report.agreement_rate()}};
  os << j.dump() << "\n";
  return kExitOk;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
  std::string out;
  std::string bins = "1,8,64,256";
  std::string steps = "1,10,50";
  int reps = 5;
  int samples = 64;
  std::uint64_t seed = 0;
};

int cmd_bench(const BenchArgs& a, std::ostream& os) {
  BenchConfig cfg;
  cfg.bins = parse_int_list(a.bins);
  cfg.steps = parse_int_list(a.steps);
  cfg.reps = a.reps;
  cfg.samples = a.samples;
  cfg.seed = a.seed;
  const auto rows = run_bench(cfg);
  std::ostringstream csv;
  write_bench_csv(rows, csv);
  if (!a.out.empty()) write_text(a.out, csv.str());
  os << csv.str();
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Compressed data representation model: training, inference and evaluation",
               "cdrm"};
  app.require_subcommand(1);

  GenArgs gen;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate a dataset");
  gen_cmd->require_subcommand(1);
  CLI::App* gen_toy_cmd = gen_cmd->add_subcommand("toy", "1-D toy regression data");
  CLI::App* gen_room_cmd = gen_cmd->add_subcommand("room", "room exploration walk");
  for (CLI::App* c : {gen_toy_cmd, gen_room_cmd}) {
    c->add_option("--out", gen.out, "output CSV path")->required();
  }
  gen.common.add(gen_toy_cmd);
  gen.n_opt = gen_toy_cmd->add_option("--n-per-region", gen.n_per_region, "tuples per region");
  gen.sigma_opt = gen_toy_cmd->add_option("--sigma-eta", gen.sigma_eta, "noise sd");
  gen_toy_cmd->add_flag("--multimodal", gen.multimodal, "append the y -> -y mirror");
  // Both leaves of gen share one Common; only one can run per invocation.
  gen_room_cmd->add_option("--config", gen.common.config_path, "JSON run configuration")
      ->check(CLI::ExistingFile);
  CLI::Option* room_seed = gen_room_cmd->add_option("--seed", gen.common.seed, "random seed");
  gen.steps_opt = gen_room_cmd->add_option("--steps", gen.steps, "walk length");
  gen.walk_opt = gen_room_cmd->add_option("--walk-step", gen.walk_step, "max step per axis");

  TrainArgs tr;
  CLI::App* train_cmd = app.add_subcommand("train", "train a model on a dataset");
  train_cmd->add_option("--data", tr.data, "dataset CSV")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", tr.out, "model file")->required();
  train_cmd->add_option("--trace", tr.trace, "loss trace CSV (default <out>.loss.csv)");
  tr.common.add(train_cmd);
  tr.epochs_opt = train_cmd->add_option("--epochs", tr.epochs, "training epochs");
  tr.spe_opt = train_cmd->add_option("--steps-per-epoch", tr.steps_per_epoch,
                                     "updates per epoch (0: one pass over the data)");
  tr.lr_opt = train_cmd->add_option("--lr", tr.learning_rate, "Adam learning rate");
  train_cmd->add_option("--lr-schedule", tr.lr_schedule, "cosine or constant")
      ->check(CLI::IsMember({"cosine", "constant"}));
  train_cmd->add_option("--kde-bandwidth", tr.bandwidth, "median, scott, or a positive number");

  InferArgs inf;
  CLI::App* infer_cmd = app.add_subcommand("infer", "predict with uncertainty for one input");
  infer_cmd->add_option("--model", inf.model, "model file")->required()->check(CLI::ExistingFile);
  infer_cmd->add_option("--query", inf.query, "comma-separated (s, a) vector")->required();
  inf.common.add(infer_cmd);
  inf.overrides.add(infer_cmd);

  EvalArgs ev;
  CLI::App* eval_cmd = app.add_subcommand("eval", "room AU/EU classification metrics");
  eval_cmd->add_option("--model", ev.model, "model file")->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", ev.out, "metrics CSV");
  eval_cmd->add_option("--probes", ev.probes, "per-probe CSV dump");
  ev.grid_opt = eval_cmd->add_option("--grid", ev.grid, "probes per room side");
  eval_cmd->add_flag("--oracle-stub", ev.oracle_stub, "score with the true region labels");
  ev.common.add(eval_cmd);
  ev.overrides.add(eval_cmd);

  OracleArgs orc;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "agreement with bin-search inference");
  oracle_cmd->add_option("--model", orc.model, "model file")->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--data", orc.data, "dataset CSV")->required()->check(CLI::ExistingFile);
  oracle_cmd->add_option("--bins", orc.bins, "bins per dimension");
  oracle_cmd->add_option("--probes", orc.probes, "probe count");
  oracle_cmd->add_option("--out", orc.out, "per-probe CSV");
  orc.common.add(oracle_cmd);
  orc.overrides.add(oracle_cmd);

  BenchArgs bn;
  CLI::App* bench_cmd = app.add_subcommand("bench", "time bin-search against CDRM inference");
  bench_cmd->add_option("--out", bn.out, "benchmark CSV");
  bench_cmd->add_option("--bins", bn.bins, "comma-separated bin counts");
  bench_cmd->add_option("--steps", bn.steps, "comma-separated Langevin step counts");
  bench_cmd->add_option("--reps", bn.reps, "timed repetitions");
  bench_cmd->add_option("--samples", bn.samples, "Langevin chains per query");
  bench_cmd->add_option("--seed", bn.seed, "random seed");

  std::vector<std::string> argv_store{"cdrm"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    CLI::App* target = &app;
    while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
    out << target->help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    CLI::App* target = &app;
    while (!target->get_subcommands().empty()) target = target->get_subcommands().front();
    err << "error: " << e.what() << "\n\n" << target->help();
    return kExitUsage;
  }

  try {
    if (*gen_toy_cmd) return cmd_gen_toy(gen, out);
    if (*gen_room_cmd) {
      gen.common.seed_opt = room_seed;
      return cmd_gen_room(gen, out);
    }
    if (*train_cmd) return cmd_train(tr, out);
    if (*infer_cmd) return cmd_infer(inf, out);
    if (*eval_cmd) return cmd_eval(ev, out);
    if (*oracle_cmd) return cmd_oracle(orc, out);
    if (*bench_cmd) return cmd_bench(bn, out);
  } catch (const TrainingDivergence& e) {
    err << "error: training diverged at epoch " << e.epoch() << ": " << e.what() << "\n";
    return kExitRuntime;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnsupportedVersion& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace cdrm
