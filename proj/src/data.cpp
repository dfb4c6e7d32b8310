#include "cdrm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "cdrm/error.hpp"
#include "cdrm/random.hpp"

namespace cdrm {

Vector Transition::joint() const {
  Vector v(s.size() + a.size() + s_next.size());
  v << s, a, s_next;
  return v;
}

Vector Transition::condition() const {
  Vector v(s.size() + a.size());
  v << s, a;
  return v;
}

Matrix TransitionDataset::joint_matrix() const {
  Matrix m(dims.total(), static_cast<Eigen::Index>(tuples.size()));
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = tuples[i].joint();
  }
  return m;
}

Matrix TransitionDataset::condition_matrix() const {
  Matrix m(dims.condition_dim(), static_cast<Eigen::Index>(tuples.size()));
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = tuples[i].condition();
  }
  return m;
}

void TransitionDataset::validate() const {
  if (dims.state_dim < 0 || dims.action_dim < 0 || dims.next_dim < 0 ||
      dims.total() == 0) {
    throw InvalidInput("dataset dims must be non-negative with a non-empty tuple");
  }
  if (static_cast<int>(bounds.size()) != dims.total()) {
    throw InvalidInput("dataset bounds must cover every joint dim");
  }
  for (const auto& b : bounds) {
    if (!(b.low < b.high)) throw InvalidInput("dataset bounds need low < high");
  }
  for (std::size_t i = 0; i < tuples.size(); ++i) {
    const auto& t = tuples[i];
    if (t.s.size() != dims.state_dim || t.a.size() != dims.action_dim ||
        t.s_next.size() != dims.next_dim) {
      throw InvalidInput("tuple " + std::to_string(i) + " has inconsistent dims");
    }
    const Vector j = t.joint();
    for (int d = 0; d < dims.total(); ++d) {
      if (!std::isfinite(j(d)) || !bounds[static_cast<std::size_t>(d)].contains(j(d))) {
        throw OutOfBounds("tuple " + std::to_string(i) + " lies outside the bounds", i);
      }
    }
  }
}

Bounds padded_bounds(const InputLayout& dims, const std::vector<Transition>& tuples) {
  Bounds bounds(static_cast<std::size_t>(dims.total()), Interval{-1.0, 1.0});
  if (tuples.empty()) return bounds;
  Vector lo = tuples.front().joint();
  Vector hi = lo;
  for (const auto& t : tuples) {
    const Vector j = t.joint();
    lo = lo.cwiseMin(j);
    hi = hi.cwiseMax(j);
  }
  for (int d = 0; d < dims.total(); ++d) {
    const double range = hi(d) - lo(d);
    const double pad = range > 0.0 ? 0.1 * range : 0.5;
    bounds[static_cast<std::size_t>(d)] = {lo(d) - pad, hi(d) + pad};
  }
  return bounds;
}

namespace {

Transition scalar_tuple(double x, double y) {
  Transition t;
  t.s = Vector::Constant(1, x);
  t.a = Vector(0);
  t.s_next = Vector::Constant(1, y);
  return t;
}

}  // namespace

TransitionDataset gen_toy(int n_per_region, double sigma_eta, bool multimodal,
                          std::uint64_t seed) {
  if (n_per_region < 1) throw InvalidInput("n_per_region must be >= 1");
  if (!(sigma_eta >= 0.0)) throw InvalidInput("sigma_eta must be >= 0");

  Rng rng(derive_seed(seed, 0x746f79ULL));
  TransitionDataset ds;
  ds.dims = {1, 0, 1};
  ds.tuples.reserve(static_cast<std::size_t>(n_per_region) * (multimodal ? 4 : 2));
  for (int i = 0; i < n_per_region; ++i) {
    const double x = uniform(rng, -1.0, kToyGapLow);
    ds.tuples.push_back(scalar_tuple(x, std::sin(x)));
  }
  for (int i = 0; i < n_per_region; ++i) {
    const double x = uniform(rng, kToyGapHigh, 1.0);
    ds.tuples.push_back(scalar_tuple(x, std::sin(x) + sigma_eta * standard_normal(rng)));
  }
  if (multimodal) {
    const std::size_t n = ds.tuples.size();
    for (std::size_t i = 0; i < n; ++i) {
      Transition t = ds.tuples[i];
      t.s_next = -t.s_next;
      ds.tuples.push_back(std::move(t));
    }
  }
  ds.bounds = padded_bounds(ds.dims, ds.tuples);
  return ds;
}

void RoomLayout::validate() const {
  auto inside = [&](const Rect& r) {
    return r.x_low >= room.x_low && r.x_high <= room.x_high && r.y_low >= room.y_low &&
           r.y_high <= room.y_high && r.x_low < r.x_high && r.y_low < r.y_high;
  };
  if (!(room.x_low < room.x_high && room.y_low < room.y_high)) {
    throw InvalidInput("room must have positive extent");
  }
  if (!inside(noisy_region) || !inside(hidden_region)) {
    throw InvalidInput("regions must lie inside the room");
  }
  if (noisy_region.overlaps(hidden_region)) {
    throw InvalidInput("noisy and hidden regions must be disjoint");
  }
  if (!(noise_std >= 0.0)) throw InvalidInput("noise_std must be >= 0");
}

TransitionDataset gen_room(int n_steps, const RoomLayout& layout, std::uint64_t seed,
                           double walk_step) {
  if (n_steps < 1) throw InvalidInput("n_steps must be >= 1");
  if (!(walk_step > 0.0)) throw InvalidInput("walk_step must be positive");
  layout.validate();

  Rng rng(derive_seed(seed, 0x726f6f6dULL));
  auto allowed = [&](double x, double y) {
    return layout.room.contains(x, y) && !layout.hidden_region.contains(x, y);
  };

  // Start from the room centre, or the first allowed corner if the centre is
  // hidden.
  double x = layout.room.center_x();
  double y = layout.room.center_y();
  if (!allowed(x, y)) {
    x = layout.room.x_low;
    y = layout.room.y_low;
    if (!allowed(x, y)) throw InvalidInput("no allowed starting position");
  }

  TransitionDataset ds;
  ds.dims = {2, 0, 1};
  ds.tuples.reserve(static_cast<std::size_t>(n_steps));
  for (int t = 0; t < n_steps; ++t) {
    const double kappa = layout.noisy_region.contains(x, y)
                             ? layout.noise_mean + layout.noise_std * standard_normal(rng)
                             : layout.base_temperature(x, y);
    Transition tr;
    tr.s = Vector(2);
    tr.s << x, y;
    tr.a = Vector(0);
    tr.s_next = Vector::Constant(1, kappa);
    ds.tuples.push_back(std::move(tr));

    for (;;) {
      const double nx = x + uniform(rng, -walk_step, walk_step);
      const double ny = y + uniform(rng, -walk_step, walk_step);
      if (allowed(nx, ny)) {
        x = nx;
        y = ny;
        break;
      }
    }
  }
  ds.bounds = padded_bounds(ds.dims, ds.tuples);
  return ds;
}

RegionLabel label_probe(const RoomLayout& layout, double x, double y) {
  if (!layout.room.contains(x, y)) {
    throw InvalidInput("probe (" + std::to_string(x) + ", " + std::to_string(y) +
                       ") lies outside the room");
  }
  if (layout.noisy_region.contains(x, y)) return RegionLabel::kAuPositive;
  if (layout.hidden_region.contains(x, y)) return RegionLabel::kEuPositive;
  return RegionLabel::kClean;
}

namespace {

void append_double(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::vector<double> parse_row(const std::string& line, std::size_t line_no) {
  std::vector<double> values;
  const char* p = line.data();
  const char* end = p + line.size();
  while (p <= end) {
    const char* comma = std::find(p, end, ',');
    // from_chars does not skip whitespace.
    while (p < comma && (*p == ' ' || *p == '\t')) ++p;
    const char* stop = comma;
    while (stop > p && (stop[-1] == ' ' || stop[-1] == '\t' || stop[-1] == '\r')) --stop;
    double v = 0.0;
    const auto res = std::from_chars(p, stop, v);
    if (res.ec != std::errc() || res.ptr != stop) {
      throw ParseError("line " + std::to_string(line_no) + ": malformed number", line_no);
    }
    values.push_back(v);
    if (comma == end) break;
    p = comma + 1;
  }
  return values;
}

}  // namespace

void save_csv(const TransitionDataset& dataset, const std::filesystem::path& path) {
  std::string out = "# dims=" + std::to_string(dataset.dims.state_dim) + "," +
                    std::to_string(dataset.dims.action_dim) + "," +
                    std::to_string(dataset.dims.next_dim) + "\n";
  for (const auto& t : dataset.tuples) {
    const Vector j = t.joint();
    for (Eigen::Index d = 0; d < j.size(); ++d) {
      if (d > 0) out.push_back(',');
      append_double(out, j(d));
    }
    out.push_back('\n');
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path.string() + " for writing");
  f << out;
  if (!f) throw Error("failed writing " + path.string());
}

TransitionDataset load_csv(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path.string());

  std::string line;
  if (!std::getline(f, line)) throw ParseError("line 1: missing header", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::string prefix = "# dims=";
  if (line.rfind(prefix, 0) != 0) {
    throw ParseError("line 1: expected '# dims=d_s,d_a,d_out' header", 1);
  }
  const auto header = parse_row(line.substr(prefix.size()), 1);
  if (header.size() != 3) throw ParseError("line 1: dims header needs three values", 1);
  for (double h : header) {
    if (h < 0 || h != std::floor(h)) {
      throw ParseError("line 1: dims must be non-negative integers", 1);
    }
  }

  TransitionDataset ds;
  ds.dims = {static_cast<int>(header[0]), static_cast<int>(header[1]),
             static_cast<int>(header[2])};
  if (ds.dims.total() == 0) throw ParseError("line 1: dims sum to zero", 1);

  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto row = parse_row(line, line_no);
    if (static_cast<int>(row.size()) != ds.dims.total()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                           std::to_string(ds.dims.total()) + " values, found " +
                           std::to_string(row.size()),
                       line_no);
    }
    Transition t;
    t.s = Eigen::Map<const Vector>(row.data(), ds.dims.state_dim);
    t.a = Eigen::Map<const Vector>(row.data() + ds.dims.state_dim, ds.dims.action_dim);
    t.s_next = Eigen::Map<const Vector>(row.data() + ds.dims.condition_dim(),
                                        ds.dims.next_dim);
    ds.tuples.push_back(std::move(t));
  }
  ds.bounds = padded_bounds(ds.dims, ds.tuples);
  return ds;
}

}  // namespace cdrm
