#include "cdrm/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "cdrm/error.hpp"
#include "cdrm/random.hpp"

namespace cdrm {

using nlohmann::json;

namespace {

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const json& a, Eigen::Index expected, const char* what) {
  if (!a.is_array() || static_cast<Eigen::Index>(a.size()) != expected) {
    throw ParseError(std::string("model file: bad length for ") + what, 0);
  }
  Vector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) {
    const auto& e = a[static_cast<std::size_t>(i)];
    if (!e.is_number()) throw ParseError(std::string("model file: non-number in ") + what, 0);
    v(i) = e.get<double>();
  }
  return v;
}

Matrix matrix_from(const json& rows, Eigen::Index r, Eigen::Index c, const char* what) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != r) {
    throw ParseError(std::string("model file: bad row count for ") + what, 0);
  }
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    m.row(i) = vector_from(rows[static_cast<std::size_t>(i)], c, what).transpose();
  }
  return m;
}

// Fixed probe battery: the centre of the bounds plus seeded uniform points.
Matrix self_check_probes(const CdrmModel& model) {
  const int dim = model.layout.total();
  Matrix probes(dim, kSelfCheckProbes);
  Rng rng(derive_seed(0x73656c66ULL, static_cast<std::uint64_t>(dim)));
  for (int j = 0; j < kSelfCheckProbes; ++j) {
    for (int d = 0; d < dim; ++d) {
      const auto& b = model.input_bounds[static_cast<std::size_t>(d)];
      probes(d, j) = j == 0 ? 0.5 * (b.low + b.high) : uniform(rng, b.low, b.high);
    }
  }
  return probes;
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(std::string("model file: missing field '") + key + "'", 0);
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("model file: bad type for '") + key + "'", 0);
  }
}

}  // namespace

std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json model_to_json(const ModelFile& file) {
  const CdrmModel& m = file.model;
  m.validate();

  json j;
  j["schema_version"] = kModelSchemaVersion;
  j["dims"] = {{"state", m.layout.state_dim},
               {"action", m.layout.action_dim},
               {"next", m.layout.next_dim}};
  j["layer_dims"] = m.net.layer_dims;
  json weights = json::array();
  json biases = json::array();
  for (int i = 0; i < m.net.num_layers(); ++i) {
    weights.push_back(matrix_rows(m.net.weights[static_cast<std::size_t>(i)]));
    biases.push_back(vector_json(m.net.biases[static_cast<std::size_t>(i)]));
  }
  j["weights"] = std::move(weights);
  j["biases"] = std::move(biases);
  j["logit_clip"] = m.logit_clip;
  json bounds = json::array();
  for (const auto& b : m.input_bounds) bounds.push_back({b.low, b.high});
  j["input_bounds"] = std::move(bounds);

  if (m.kde) {
    // One reference point per row.
    j["kde"] = {{"bandwidth", m.kde->bandwidth},
                {"mu", m.kde->mu},
                {"sigma", m.kde->sigma},
                {"references", matrix_rows(m.kde->reference_points.transpose())}};
  } else {
    j["kde"] = nullptr;
  }
  j["provenance"] = {{"config_hash", file.provenance.config_hash},
                     {"seed", file.provenance.seed},
                     {"epochs", file.provenance.epochs}};

  const Matrix probes = self_check_probes(m);
  RowVector scores;
  score_batch(m, probes, scores, nullptr);
  j["self_check"] = {{"probes", matrix_rows(probes.transpose())},
                     {"scores", vector_json(scores.transpose())}};
  return j;
}

ModelFile model_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("model file: top level must be an object", 0);
  const int version = field<int>(j, "schema_version");
  if (version != kModelSchemaVersion) {
    throw UnsupportedVersion("model schema_version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kModelSchemaVersion) + ")");
  }

  ModelFile file;
  CdrmModel& m = file.model;
  const json& dims = j.contains("dims") ? j["dims"] : json();
  m.layout = {field<int>(dims, "state"), field<int>(dims, "action"),
              field<int>(dims, "next")};
  m.net.layer_dims = field<std::vector<int>>(j, "layer_dims");
  if (m.net.layer_dims.size() < 2) throw ParseError("model file: too few layers", 0);
  const auto& weights = j.contains("weights") ? j["weights"] : json();
  const auto& biases = j.contains("biases") ? j["biases"] : json();
  const std::size_t layers = m.net.layer_dims.size() - 1;
  if (!weights.is_array() || weights.size() != layers || !biases.is_array() ||
      biases.size() != layers) {
    throw ParseError("model file: weights/biases do not match layer_dims", 0);
  }
  for (std::size_t i = 0; i < layers; ++i) {
    const int in = m.net.layer_dims[i];
    const int out = m.net.layer_dims[i + 1];
    if (in <= 0 || out <= 0) throw ParseError("model file: non-positive layer dim", 0);
    m.net.weights.push_back(matrix_from(weights[i], out, in, "weights"));
    m.net.biases.push_back(vector_from(biases[i], out, "biases"));
  }
  m.logit_clip = field<double>(j, "logit_clip");
  const auto bounds = field<std::vector<std::vector<double>>>(j, "input_bounds");
  for (const auto& b : bounds) {
    if (b.size() != 2) throw ParseError("model file: bounds need [low, high]", 0);
    m.input_bounds.push_back({b[0], b[1]});
  }

  if (j.contains("kde") && !j["kde"].is_null()) {
    const json& k = j["kde"];
    KdeStats stats;
    stats.bandwidth = field<double>(k, "bandwidth");
    stats.mu = field<double>(k, "mu");
    stats.sigma = field<double>(k, "sigma");
    const json& refs = k.contains("references") ? k["references"] : json();
    if (!refs.is_array() || refs.empty()) {
      throw ParseError("model file: KDE needs reference points", 0);
    }
    stats.reference_points =
        matrix_from(refs, static_cast<Eigen::Index>(refs.size()), m.layout.condition_dim(),
                    "kde references")
            .transpose();
    m.kde = std::move(stats);
  }

  try {
    m.validate();
  } catch (const InvalidInput& e) {
    throw ParseError(std::string("model file: ") + e.what(), 0);
  }

  if (j.contains("provenance")) {
    const json& p = j["provenance"];
    file.provenance.config_hash = field<std::string>(p, "config_hash");
    file.provenance.seed = field<std::uint64_t>(p, "seed");
    file.provenance.epochs = field<int>(p, "epochs");
  }

  const json& check = j.contains("self_check") ? j["self_check"] : json();
  const json& probe_rows = check.is_object() && check.contains("probes") ? check["probes"] : json();
  const Matrix probes =
      matrix_from(probe_rows, kSelfCheckProbes, m.layout.total(), "self_check probes")
          .transpose();
  const Vector expected = vector_from(check.is_object() && check.contains("scores")
                                          ? check["scores"]
                                          : json(),
                                      kSelfCheckProbes, "self_check scores");
  RowVector scores;
  score_batch(m, probes, scores, nullptr);
  for (int i = 0; i < kSelfCheckProbes; ++i) {
    if (scores(i) != expected(i)) {
      throw Error("model file self-check failed at probe " + std::to_string(i));
    }
  }
  return file;
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << model_to_json(file).dump(1) << '\n';
  if (!f) throw Error("failed writing " + path.string());
}

ModelFile load_model(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return model_from_json(j);
}

}  // namespace cdrm
