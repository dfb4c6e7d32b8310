#include "cdrm/run_config.hpp"

#include <fstream>
#include <set>
#include <string>
#include <type_traits>

#include "cdrm/error.hpp"

namespace cdrm {

using nlohmann::json;

namespace {

// Reads known keys from one JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InvalidInput(path_ + " must be a JSON object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_integral_v<T>) {
      // nlohmann would truncate 1.5 to 1 and wrap -1 into an unsigned.
      const bool ok = std::is_signed_v<T> ? v.is_number_integer() : v.is_number_unsigned();
      if (!ok) throw InvalidInput(path_ + "." + key + " has the wrong type");
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw InvalidInput(path_ + "." + key + " has the wrong type");
    }
  }

  const json* object(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw InvalidInput("unknown config key " + path_ + "." + item.key());
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_rect(const json& j, const std::string& path, Rect& r) {
  if (!j.is_array() || j.size() != 4) {
    throw InvalidInput(path + " must be [x_low, x_high, y_low, y_high]");
  }
  try {
    r = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  } catch (const json::exception&) {
    throw InvalidInput(path + " must contain numbers");
  }
}

json rect_json(const Rect& r) { return {r.x_low, r.x_high, r.y_low, r.y_high}; }

}  // namespace

void RunConfig::validate() const {
  for (int h : hidden_dims) {
    if (h <= 0) throw InvalidInput("hidden_dims entries must be positive");
  }
  train.validate();
  inference.validate();
  if (bandwidth.kind == BandwidthRule::Kind::kFixed && !(bandwidth.value > 0.0)) {
    throw InvalidInput("fixed KDE bandwidth must be positive");
  }
  layout.validate();
  if (toy_per_region < 1) throw InvalidInput("toy.n_per_region must be >= 1");
  if (!(toy_sigma_eta >= 0.0)) throw InvalidInput("toy.sigma_eta must be >= 0");
  if (room_steps < 1) throw InvalidInput("room.steps must be >= 1");
  if (!(room_walk_step > 0.0)) throw InvalidInput("room.walk_step must be > 0");
  if (grid_resolution < 1) throw InvalidInput("eval.grid_resolution must be >= 1");
}

RunConfig run_config_from_json(const json& j) {
  RunConfig cfg;
  ObjectReader top(j, "config");
  top.get("seed", cfg.seed);
  top.get("hidden_dims", cfg.hidden_dims);

  if (const json* t = top.object("train")) {
    ObjectReader r(*t, "config.train");
    r.get("epochs", cfg.train.epochs);
    r.get("positive_batch", cfg.train.positive_batch);
    r.get("negative_batch", cfg.train.negative_batch);
    r.get("steps_per_epoch", cfg.train.steps_per_epoch);
    r.get("learning_rate", cfg.train.learning_rate);
    r.get("stability_eps", cfg.train.stability_eps);
    if (const json* v = r.object("lr_schedule")) {
      const std::string name = v->is_string() ? v->get<std::string>() : "";
      if (name == "cosine") {
        cfg.train.lr_schedule = LrSchedule::kCosine;
      } else if (name == "constant") {
        cfg.train.lr_schedule = LrSchedule::kConstant;
      } else {
        throw InvalidInput("config.train.lr_schedule must be \"cosine\" or \"constant\"");
      }
    }
    if (const json* l = r.object("langevin")) {
      ObjectReader lr(*l, "config.train.langevin");
      lr.get("steps", cfg.train.langevin.steps);
      lr.get("step_size", cfg.train.langevin.step_size);
      lr.get("noise_scale", cfg.train.langevin.noise_scale);
      lr.finish();
    }
    r.finish();
  }

  if (const json* i = top.object("inference")) {
    ObjectReader r(*i, "config.inference");
    r.get("n_samples", cfg.inference.n_samples);
    r.get("steps", cfg.inference.steps);
    r.get("step_size", cfg.inference.step_size);
    r.get("noise_scale", cfg.inference.noise_scale);
    r.get("alpha", cfg.inference.alpha);
    r.get("dedup_fraction", cfg.inference.dedup_fraction);
    r.finish();
  }

  if (const json* k = top.object("kde")) {
    ObjectReader r(*k, "config.kde");
    if (const json* bw = r.object("bandwidth")) {
      if (bw->is_string() && bw->get<std::string>() == "median") {
        cfg.bandwidth = BandwidthRule::median();
      } else if (bw->is_string() && bw->get<std::string>() == "scott") {
        cfg.bandwidth = BandwidthRule::scott();
      } else if (bw->is_number()) {
        cfg.bandwidth = BandwidthRule::fixed(bw->get<double>());
      } else {
        throw InvalidInput("config.kde.bandwidth must be \"median\", \"scott\" or a number");
      }
    }
    r.finish();
  }

  if (const json* l = top.object("layout")) {
    ObjectReader r(*l, "config.layout");
    if (const json* v = r.object("room")) read_rect(*v, "config.layout.room", cfg.layout.room);
    if (const json* v = r.object("noisy_region")) {
      read_rect(*v, "config.layout.noisy_region", cfg.layout.noisy_region);
    }
    if (const json* v = r.object("hidden_region")) {
      read_rect(*v, "config.layout.hidden_region", cfg.layout.hidden_region);
    }
    r.get("noise_mean", cfg.layout.noise_mean);
    r.get("noise_std", cfg.layout.noise_std);
    r.get("base_slope", cfg.layout.base_slope);
    r.get("base_offset", cfg.layout.base_offset);
    r.finish();
  }

  if (const json* t = top.object("toy")) {
    ObjectReader r(*t, "config.toy");
    r.get("n_per_region", cfg.toy_per_region);
    r.get("sigma_eta", cfg.toy_sigma_eta);
    r.finish();
  }

  if (const json* t = top.object("room")) {
    ObjectReader r(*t, "config.room");
    r.get("steps", cfg.room_steps);
    r.get("walk_step", cfg.room_walk_step);
    r.finish();
  }

  if (const json* e = top.object("eval")) {
    ObjectReader r(*e, "config.eval");
    r.get("grid_resolution", cfg.grid_resolution);
    r.finish();
  }
  top.finish();

  cfg.validate();
  return cfg;
}

json run_config_to_json(const RunConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["hidden_dims"] = cfg.hidden_dims;
  j["train"] = {{"epochs", cfg.train.epochs},
                {"positive_batch", cfg.train.positive_batch},
                {"negative_batch", cfg.train.negative_batch},
                {"steps_per_epoch", cfg.train.steps_per_epoch},
                {"learning_rate", cfg.train.learning_rate},
                {"stability_eps", cfg.train.stability_eps},
                {"lr_schedule",
                 cfg.train.lr_schedule == LrSchedule::kCosine ? "cosine" : "constant"},
                {"langevin",
                 {{"steps", cfg.train.langevin.steps},
                  {"step_size", cfg.train.langevin.step_size},
                  {"noise_scale", cfg.train.langevin.noise_scale}}}};
  j["inference"] = {{"n_samples", cfg.inference.n_samples},
                    {"steps", cfg.inference.steps},
                    {"step_size", cfg.inference.step_size},
                    {"noise_scale", cfg.inference.noise_scale},
                    {"alpha", cfg.inference.alpha},
                    {"dedup_fraction", cfg.inference.dedup_fraction}};
  if (cfg.bandwidth.kind == BandwidthRule::Kind::kFixed) {
    j["kde"] = {{"bandwidth", cfg.bandwidth.value}};
  } else if (cfg.bandwidth.kind == BandwidthRule::Kind::kScott) {
    j["kde"] = {{"bandwidth", "scott"}};
  } else {
    j["kde"] = {{"bandwidth", "median"}};
  }
  j["layout"] = {{"room", rect_json(cfg.layout.room)},
                 {"noisy_region", rect_json(cfg.layout.noisy_region)},
                 {"hidden_region", rect_json(cfg.layout.hidden_region)},
                 {"noise_mean", cfg.layout.noise_mean},
                 {"noise_std", cfg.layout.noise_std},
                 {"base_slope", cfg.layout.base_slope},
                 {"base_offset", cfg.layout.base_offset}};
  j["toy"] = {{"n_per_region", cfg.toy_per_region}, {"sigma_eta", cfg.toy_sigma_eta}};
  j["room"] = {{"steps", cfg.room_steps}, {"walk_step", cfg.room_walk_step}};
  j["eval"] = {{"grid_resolution", cfg.grid_resolution}};
  return j;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidInput("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return run_config_from_json(j);
}

}  // namespace cdrm
