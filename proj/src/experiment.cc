#include "homlab/experiment.hh"
#include "homlab/parallel.hh"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace homlab {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::homogenize: return "homogenize";
    case ExperimentKind::nonlocal: return "nonlocal";
    case ExperimentKind::properties: return "properties";
  }
  return "?";
}

ExperimentKind experiment_kind_from_string(const std::string & s) {
  if (s == "homogenize") return ExperimentKind::homogenize;
  if (s == "nonlocal") return ExperimentKind::nonlocal;
  if (s == "properties") return ExperimentKind::properties;
  throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

bool operator==(const NonlocalFieldSpec & a, const NonlocalFieldSpec & b) {
  auto same = [](const RigidMotion & x, const RigidMotion & y) {
    return x.dim() == y.dim() && x.parameters() == y.parameters();
  };
  if (!same(a.u1, b.u1) || !same(a.u2, b.u2) || a.random_scale != b.random_scale) return false;
  if (a.tile_overrides.size() != b.tile_overrides.size()) return false;
  for (const auto & [t, m] : a.tile_overrides) {
    const auto it = b.tile_overrides.find(t);
    if (it == b.tile_overrides.end() || !same(m, it->second)) return false;
  }
  return true;
}

bool operator==(const ExperimentConfig & a, const ExperimentConfig & b) {
  const auto & sa = a.solver;
  const auto & sb = b.solver;
  const auto & pa = a.properties;
  const auto & pb = b.properties;
  return a.schema_version == b.schema_version && a.kind == b.kind && a.seed == b.seed &&
         a.structure == b.structure && a.ks == b.ks && a.integrand == b.integrand && a.strains == b.strains &&
         a.strain_count == b.strain_count && a.gamma == b.gamma && a.omega.x0 == b.omega.x0 &&
         a.omega.x1 == b.omega.x1 && a.omega.y0 == b.omega.y0 && a.omega.y1 == b.omega.y1 &&
         a.epsilons == b.epsilons && a.eta == b.eta && a.quad_nodes == b.quad_nodes && a.field == b.field &&
         sa.cg_relative_residual == sb.cg_relative_residual && sa.gradient_tolerance == sb.gradient_tolerance &&
         sa.subadditivity_slack == sb.subadditivity_slack && sa.max_iterations == sb.max_iterations &&
         sa.huber_delta == sb.huber_delta && pa.k == pb.k && pa.samples == pb.samples &&
         pa.gauge_trials == pb.gauge_trials && pa.coercivity_samples == pb.coercivity_samples &&
         a.growth_samples == b.growth_samples && a.outputs == b.outputs;
}

/* ---------------------------------------------------------------------- */
namespace {

void check_keys(const json & j, const std::string & where, std::initializer_list<const char *> allowed) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto & [key, value] : j.items()) {
    if (!ok.count(key)) throw std::invalid_argument(where + ": unknown field '" + key + "'");
  }
}

template <class T>
T get_or(const json & j, const char * key, T fallback, const std::string & where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception & e) {
    throw std::invalid_argument(where + "." + key + ": " + e.what());
  }
}

json matrix_to_json(const Matrix & m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix matrix_from_json(const json & j, const std::string & where) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(where + ": expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<Eigen::Index>(j[i].size()) != cols) {
      throw std::invalid_argument(where + ": rows of unequal length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

Vector vector_from_json(const json & j, const std::string & where) {
  if (!j.is_array()) throw std::invalid_argument(where + ": expected an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

json vector_to_json(const Vector & v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

SolverOptions solver_from_json(const json & j) {
  check_keys(j, "tolerances",
             {"cg_relative_residual", "gradient_tolerance", "subadditivity_slack", "max_iterations", "huber_delta"});
  SolverOptions o;
  o.cg_relative_residual = get_or(j, "cg_relative_residual", o.cg_relative_residual, "tolerances");
  o.gradient_tolerance = get_or(j, "gradient_tolerance", o.gradient_tolerance, "tolerances");
  o.subadditivity_slack = get_or(j, "subadditivity_slack", o.subadditivity_slack, "tolerances");
  o.max_iterations = get_or(j, "max_iterations", o.max_iterations, "tolerances");
  o.huber_delta = get_or(j, "huber_delta", o.huber_delta, "tolerances");
  return o;
}

std::mt19937_64 stream_rng(std::uint64_t seed, std::uint32_t stream, std::int64_t a = 0, std::int64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream,
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  return std::mt19937_64(seq);
}

std::string strain_column(int i, int j) { return "A_" + std::to_string(i + 1) + std::to_string(j + 1); }

}  // namespace

/* ---------------------------------------------------------------------- */
json to_json(const Integrand & f) {
  json j;
  if (const auto * pp = std::get_if<PurePower>(&f.form())) {
    j["type"] = "pure_power";
    j["exponent"] = pp->exponent;
    j["weight"] = pp->weight;
  } else {
    j["type"] = "quadratic_form";
    j["stiffness"] = matrix_to_json(std::get<QuadraticForm>(f.form()).stiffness);
  }
  json w = json::object();
  for (const auto & [r, v] : f.region_weights()) w[to_string(r)] = v;
  j["region_weights"] = w;
  j["alpha"] = f.alpha();
  j["beta"] = f.beta();
  return j;
}

Integrand integrand_from_json(const json & j) {
  check_keys(j, "integrand", {"type", "exponent", "weight", "stiffness", "region_weights", "alpha", "beta"});
  const auto type = get_or<std::string>(j, "type", "pure_power", "integrand");
  Integrand::Form form;
  if (type == "pure_power") {
    if (j.contains("stiffness")) throw std::invalid_argument("integrand: stiffness given for a pure power");
    form = PurePower{get_or(j, "exponent", 2.0, "integrand"), get_or(j, "weight", 1.0, "integrand")};
  } else if (type == "quadratic_form") {
    if (!j.contains("stiffness")) throw std::invalid_argument("integrand: quadratic_form needs a stiffness");
    form = QuadraticForm{matrix_from_json(j.at("stiffness"), "integrand.stiffness")};
  } else {
    throw std::invalid_argument("integrand: unknown type '" + type + "'");
  }
  std::map<Region, double> weights{{Region::volume, 1.0}, {Region::interface, 1.0}};
  if (j.contains("region_weights")) {
    weights.clear();
    if (!j.at("region_weights").is_object()) throw std::invalid_argument("integrand.region_weights: expected an object");
    for (const auto & [key, value] : j.at("region_weights").items()) {
      weights[region_from_string(key)] = value.get<double>();
    }
  }
  std::optional<double> alpha;
  std::optional<double> beta;
  if (j.contains("alpha")) alpha = j.at("alpha").get<double>();
  if (j.contains("beta")) beta = j.at("beta").get<double>();
  return Integrand(std::move(form), std::move(weights), alpha, beta);
}

json to_json(const RigidMotion & m) {
  return {{"rotation", vector_to_json(m.rotation.parameters())}, {"translation", vector_to_json(m.translation)}};
}

RigidMotion rigid_motion_from_json(const json & j, int n) {
  check_keys(j, "rigid motion", {"rotation", "translation"});
  Vector p = Vector::Zero(RigidMotion::parameter_count(n));
  if (j.contains("rotation")) {
    const Vector r = vector_from_json(j.at("rotation"), "rigid motion.rotation");
    if (r.size() != skew_size(n)) throw std::invalid_argument("rigid motion: rotation needs " + std::to_string(skew_size(n)) + " entries");
    p.head(skew_size(n)) = r;
  }
  if (j.contains("translation")) {
    const Vector t = vector_from_json(j.at("translation"), "rigid motion.translation");
    if (t.size() != n) throw std::invalid_argument("rigid motion: translation needs " + std::to_string(n) + " entries");
    p.tail(n) = t;
  }
  return RigidMotion::from_parameters(n, {p.data(), static_cast<std::size_t>(p.size())});
}

/* ---------------------------------------------------------------------- */
json to_json(const ExperimentConfig & cfg) {
  json j;
  j["schema_version"] = cfg.schema_version;
  j["kind"] = to_string(cfg.kind);
  j["seed"] = cfg.seed;
  j["structure"] = {{"family", to_string(cfg.structure.family)},
                    {"n", cfg.structure.n},
                    {"m", cfg.structure.m},
                    {"interface", cfg.structure.interface},
                    {"face_quadrature", cfg.structure.face_quadrature},
                    {"k", cfg.ks}};
  j["integrand"] = to_json(cfg.integrand);
  json explicit_strains = json::array();
  for (const auto & A : cfg.strains) explicit_strains.push_back(matrix_to_json(A.matrix()));
  j["strains"] = {{"explicit", explicit_strains}, {"count", cfg.strain_count}};
  j["gamma"] = cfg.gamma;

  json field = {{"u1", to_json(cfg.field.u1)}, {"u2", to_json(cfg.field.u2)}};
  json tiles = json::array();
  for (const auto & [t, m] : cfg.field.tile_overrides) {
    json entry = to_json(m);
    entry["tile"] = {t[0], t[1]};
    tiles.push_back(entry);
  }
  field["tiles"] = tiles;
  field["random_scale"] = cfg.field.random_scale ? json(*cfg.field.random_scale) : json(nullptr);
  j["nonlocal"] = {{"omega", {cfg.omega.x0, cfg.omega.x1, cfg.omega.y0, cfg.omega.y1}},
                   {"epsilon", cfg.epsilons},
                   {"eta", cfg.eta},
                   {"quad_nodes", cfg.quad_nodes},
                   {"field", field}};
  j["tolerances"] = {{"cg_relative_residual", cfg.solver.cg_relative_residual},
                     {"gradient_tolerance", cfg.solver.gradient_tolerance},
                     {"subadditivity_slack", cfg.solver.subadditivity_slack},
                     {"max_iterations", cfg.solver.max_iterations},
                     {"huber_delta", cfg.solver.huber_delta}};
  j["properties"] = {{"k", cfg.properties.k},
                     {"samples", cfg.properties.samples},
                     {"gauge_trials", cfg.properties.gauge_trials},
                     {"coercivity_samples", cfg.properties.coercivity_samples},
                     {"growth_samples", cfg.growth_samples}};
  j["outputs"] = {{"directory", cfg.outputs.directory}, {"prefix", cfg.outputs.prefix}};
  return j;
}

ExperimentConfig config_from_json(const json & j) {
  check_keys(j, "config",
             {"schema_version", "kind", "seed", "structure", "integrand", "strains", "gamma", "nonlocal", "tolerances",
              "properties", "outputs"});
  ExperimentConfig cfg;
  if (!j.contains("schema_version")) throw std::invalid_argument("config: missing schema_version");
  cfg.schema_version = j.at("schema_version").get<int>();
  if (cfg.schema_version != kSchemaVersion) {
    throw std::invalid_argument("config: unsupported schema_version " + std::to_string(cfg.schema_version));
  }
  if (!j.contains("kind")) throw std::invalid_argument("config: missing kind");
  cfg.kind = experiment_kind_from_string(j.at("kind").get<std::string>());
  cfg.seed = get_or<std::uint64_t>(j, "seed", cfg.seed, "config");

  if (j.contains("structure")) {
    const auto & s = j.at("structure");
    check_keys(s, "structure", {"family", "n", "m", "interface", "face_quadrature", "k"});
    cfg.structure.family = family_from_string(get_or<std::string>(s, "family", "rigid_spring", "structure"));
    cfg.structure.n = get_or(s, "n", cfg.structure.n, "structure");
    cfg.structure.m = get_or(s, "m", cfg.structure.m, "structure");
    cfg.structure.interface = get_or(s, "interface", cfg.structure.interface, "structure");
    cfg.structure.face_quadrature = get_or(s, "face_quadrature", cfg.structure.face_quadrature, "structure");
    cfg.ks = get_or(s, "k", cfg.ks, "structure");
  }
  if (j.contains("integrand")) cfg.integrand = integrand_from_json(j.at("integrand"));
  if (j.contains("strains")) {
    const auto & s = j.at("strains");
    check_keys(s, "strains", {"explicit", "count"});
    if (s.contains("explicit")) {
      if (!s.at("explicit").is_array()) throw std::invalid_argument("strains.explicit: expected an array");
      for (const auto & m : s.at("explicit")) {
        cfg.strains.push_back(SymMatrix::from_matrix(matrix_from_json(m, "strains.explicit")));
      }
    }
    cfg.strain_count = get_or(s, "count", 0, "strains");
  }
  cfg.gamma = get_or(j, "gamma", cfg.gamma, "config");

  if (j.contains("nonlocal")) {
    const auto & nl = j.at("nonlocal");
    check_keys(nl, "nonlocal", {"omega", "epsilon", "eta", "quad_nodes", "field"});
    if (nl.contains("omega")) {
      const auto o = nl.at("omega").get<std::vector<double>>();
      if (o.size() != 4) throw std::invalid_argument("nonlocal.omega: expected [x0, x1, y0, y1]");
      cfg.omega = {o[0], o[1], o[2], o[3]};
    }
    cfg.epsilons = get_or(nl, "epsilon", cfg.epsilons, "nonlocal");
    cfg.eta = get_or(nl, "eta", cfg.eta, "nonlocal");
    cfg.quad_nodes = get_or(nl, "quad_nodes", cfg.quad_nodes, "nonlocal");
    if (nl.contains("field")) {
      const auto & f = nl.at("field");
      check_keys(f, "nonlocal.field", {"u1", "u2", "tiles", "random_scale"});
      if (f.contains("u1")) cfg.field.u1 = rigid_motion_from_json(f.at("u1"), 3);
      if (f.contains("u2")) cfg.field.u2 = rigid_motion_from_json(f.at("u2"), 3);
      if (f.contains("tiles")) {
        for (const auto & entry : f.at("tiles")) {
          if (!entry.contains("tile")) throw std::invalid_argument("nonlocal.field.tiles: entry without 'tile'");
          const auto t = entry.at("tile").get<std::vector<int>>();
          if (t.size() != 2) throw std::invalid_argument("nonlocal.field.tiles: 'tile' must be [i, j]");
          json motion = entry;
          motion.erase("tile");
          if (!cfg.field.tile_overrides.emplace(TileIndex{t[0], t[1]}, rigid_motion_from_json(motion, 3)).second) {
            throw std::invalid_argument("nonlocal.field.tiles: duplicate tile");
          }
        }
      }
      if (f.contains("random_scale") && !f.at("random_scale").is_null()) {
        cfg.field.random_scale = f.at("random_scale").get<double>();
      }
    }
  }
  if (j.contains("tolerances")) cfg.solver = solver_from_json(j.at("tolerances"));
  if (j.contains("properties")) {
    const auto & p = j.at("properties");
    check_keys(p, "properties", {"k", "samples", "gauge_trials", "coercivity_samples", "growth_samples"});
    cfg.properties.k = get_or(p, "k", cfg.properties.k, "properties");
    cfg.properties.samples = get_or(p, "samples", cfg.properties.samples, "properties");
    cfg.properties.gauge_trials = get_or(p, "gauge_trials", cfg.properties.gauge_trials, "properties");
    cfg.properties.coercivity_samples = get_or(p, "coercivity_samples", cfg.properties.coercivity_samples, "properties");
    cfg.growth_samples = get_or(p, "growth_samples", cfg.growth_samples, "properties");
  }
  if (j.contains("outputs")) {
    const auto & o = j.at("outputs");
    check_keys(o, "outputs", {"directory", "prefix"});
    cfg.outputs.directory = get_or(o, "directory", cfg.outputs.directory, "outputs");
    cfg.outputs.prefix = get_or(o, "prefix", cfg.outputs.prefix, "outputs");
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path & path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception & e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void validate(const ExperimentConfig & cfg) {
  if (cfg.schema_version != kSchemaVersion) throw std::invalid_argument("config: unsupported schema_version");
  const auto & s = cfg.structure;
  if (s.family == Family::rigid_spring) require_supported_dim(s.n);
  if (s.family == Family::elastic_spring && s.n != 2) {
    throw std::invalid_argument("structure: the elastic family is two-dimensional (n = 2)");
  }
  if (s.m < 1) throw std::invalid_argument("structure.m must be >= 1");
  if (s.face_quadrature < 0 || s.face_quadrature > 5) {
    throw std::invalid_argument("structure.face_quadrature must be in 0..5");
  }
  if (!cfg.integrand.is_convex()) throw std::invalid_argument("integrand: not convex");
  if (const auto d = cfg.integrand.dimension(); d && *d != s.dim()) {
    throw std::invalid_argument("integrand: stiffness dimension does not match the structure");
  }
  for (const auto & A : cfg.strains) {
    if (A.dim() != s.dim()) throw std::invalid_argument("strains: dimension does not match the structure");
  }
  if (cfg.strain_count < 0) throw std::invalid_argument("strains.count must be >= 0");
  if (cfg.solver.max_iterations < 1) throw std::invalid_argument("tolerances.max_iterations must be >= 1");

  switch (cfg.kind) {
    case ExperimentKind::homogenize:
      if (cfg.ks.empty()) throw std::invalid_argument("structure.k: empty list for a homogenize run");
      for (std::size_t i = 0; i < cfg.ks.size(); ++i) {
        if (cfg.ks[i] < 1 || (i > 0 && cfg.ks[i] <= cfg.ks[i - 1])) {
          throw std::invalid_argument("structure.k must be positive and increasing");
        }
      }
      if (cfg.strains.empty() && cfg.strain_count == 0) throw std::invalid_argument("strains: no strains given");
      break;
    case ExperimentKind::nonlocal: {
      if (cfg.epsilons.empty()) throw std::invalid_argument("nonlocal.epsilon: empty list for a nonlocal run");
      if (!(cfg.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
      if (!(cfg.omega.x1 > cfg.omega.x0) || !(cfg.omega.y1 > cfg.omega.y0)) {
        throw std::invalid_argument("nonlocal.omega is empty");
      }
      if (cfg.quad_nodes < 8) throw std::invalid_argument("nonlocal.quad_nodes must be >= 8");
      for (std::size_t i = 0; i < cfg.epsilons.size(); ++i) {
        if (!(cfg.epsilons[i] > 0.0) || (i > 0 && !(cfg.epsilons[i] < cfg.epsilons[i - 1]))) {
          throw std::invalid_argument("nonlocal.epsilon must be positive and decreasing");
        }
        try {
          build_tile_grid(cfg.omega, cfg.eta, cfg.epsilons[i]);
        } catch (const std::invalid_argument & e) {
          throw std::invalid_argument(std::string("nonlocal: epsilon incompatible with eta: ") + e.what());
        }
      }
      const auto tiles = tiles_covering(cfg.omega, cfg.eta);
      const std::set<TileIndex> covering(tiles.begin(), tiles.end());
      for (const auto & [t, m] : cfg.field.tile_overrides) {
        if (!covering.count(t)) throw std::invalid_argument("nonlocal.field.tiles: tile outside omega");
      }
      if (cfg.field.random_scale && !(*cfg.field.random_scale >= 0.0)) {
        throw std::invalid_argument("nonlocal.field.random_scale must be >= 0");
      }
      break;
    }
    case ExperimentKind::properties:
      if (cfg.properties.k < 1) throw std::invalid_argument("properties.k must be >= 1");
      if (cfg.properties.samples < 0 || cfg.properties.gauge_trials < 0 || cfg.properties.coercivity_samples < 0) {
        throw std::invalid_argument("properties: sample counts must be >= 0");
      }
      if (cfg.growth_samples < 1) throw std::invalid_argument("properties.growth_samples must be >= 1");
      break;
  }
}

std::string config_hash(const ExperimentConfig & cfg) {
  const std::string canonical = to_json(cfg).dump();
  std::uint64_t h = 14695981039346656037ULL;
  for (const unsigned char c : canonical) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<SymMatrix> resolve_strains(const ExperimentConfig & cfg) {
  std::vector<SymMatrix> out = cfg.strains;
  auto rng = stream_rng(cfg.seed, 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = cfg.structure.dim();
  for (int s = 0; s < cfg.strain_count; ++s) {
    SymMatrix A(n);
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) A.set(i, j, u(rng));
    }
    out.push_back(A);
  }
  return out;
}

TwoPhaseField resolve_field(const ExperimentConfig & cfg) {
  const auto & spec = cfg.field;
  return TwoPhaseField(spec.u1, cfg.omega, cfg.eta, [&](const TileIndex & t) {
    if (const auto it = spec.tile_overrides.find(t); it != spec.tile_overrides.end()) return it->second;
    if (!spec.random_scale) return spec.u2;
    // one stream per tile so the draw does not depend on traversal order
    auto rng = stream_rng(cfg.seed, 2, t[0], t[1]);
    std::uniform_real_distribution<double> u(-*spec.random_scale, *spec.random_scale);
    std::array<double, 6> p{};
    for (auto & v : p) v = u(rng);
    return RigidMotion::from_parameters(3, p);
  });
}

/* ---------------------------------------------------------------------- */
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

std::string Table::to_csv() const {
  auto field = [](const std::string & s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (const char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  std::ostringstream os;
  auto line = [&](const std::vector<std::string> & cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << field(cells[i]);
    os << '\n';
  };
  line(header);
  for (const auto & r : rows) line(r);
  return os.str();
}

void ResultBundle::write(const std::filesystem::path & directory, const std::string & prefix) const {
  std::filesystem::create_directories(directory);
  for (const auto & [name, table] : tables) {
    std::ofstream out(directory / (prefix + name));
    if (!out) throw std::runtime_error("cannot write " + (directory / (prefix + name)).string());
    out << table.to_csv();
  }
  std::ofstream out(directory / (prefix + "summary.json"));
  if (!out) throw std::runtime_error("cannot write summary.json");
  out << summary.dump(2) << '\n';
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json provenance(const ExperimentConfig & cfg, double wall_time, const std::vector<double> & task_times) {
  return {{"config_hash", config_hash(cfg)},
          {"library_version", kLibraryVersion},
          {"wall_time", wall_time},
          {"task_wall_times", task_times}};
}

void require_kind(const ExperimentConfig & cfg, ExperimentKind kind) {
  validate(cfg);
  if (cfg.kind != kind) {
    throw std::invalid_argument("config kind is '" + to_string(cfg.kind) + "', expected '" + to_string(kind) + "'");
  }
}

std::vector<std::string> strain_header(int n) {
  std::vector<std::string> h;
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) h.push_back(strain_column(i, j));
  }
  return h;
}

void append_strain(std::vector<std::string> & row, const SymMatrix & A) {
  for (int i = 0; i < A.dim(); ++i) {
    for (int j = i; j < A.dim(); ++j) row.push_back(format_double(A(i, j)));
  }
}

}  // namespace

ResultBundle run_homogenize(const ExperimentConfig & cfg, int threads) {
  require_kind(cfg, ExperimentKind::homogenize);
  const auto t0 = std::chrono::steady_clock::now();
  const auto strains = resolve_strains(cfg);
  const int n = cfg.structure.dim();

  std::vector<FhomEstimate> estimates(strains.size());
  std::vector<double> times(strains.size());
  parallel_for(strains.size(), threads, [&](std::size_t i) {
    const auto ti = std::chrono::steady_clock::now();
    estimates[i] = f_hom_estimate(cfg.structure, cfg.integrand, strains[i], cfg.ks, cfg.solver);
    times[i] = seconds_since(ti);
  });

  ResultBundle out;
  Table g;
  g.header = {"strain_id"};
  for (const auto & c : strain_header(n)) g.header.push_back(c);
  for (const char * c : {"k", "g_k", "residual", "iterations", "method", "converged", "flagged"}) g.header.push_back(c);
  Table fh;
  fh.header = {"strain_id"};
  for (const auto & c : strain_header(n)) fh.header.push_back(c);
  for (const char * c : {"f_hom_estimate", "last_decrement", "subadditive", "smoothing_gap_bound", "flagged"}) {
    fh.header.push_back(c);
  }

  int flagged_rows = 0;
  json messages = json::array();
  for (std::size_t i = 0; i < strains.size(); ++i) {
    const auto & est = estimates[i];
    for (std::size_t s = 0; s < est.ks.size(); ++s) {
      const auto & r = est.reports[s];
      std::vector<std::string> row{std::to_string(i)};
      append_strain(row, strains[i]);
      row.insert(row.end(), {std::to_string(est.ks[s]), format_double(r.g), format_double(r.residual),
                             std::to_string(r.iterations), r.method, r.converged ? "1" : "0",
                             r.converged ? "0" : "1"});
      g.rows.push_back(row);
      if (!r.converged) ++flagged_rows;
    }
    double gap = 0.0;
    for (const auto & r : est.reports) gap = std::max(gap, r.smoothing_gap_bound);
    std::vector<std::string> row{std::to_string(i)};
    append_strain(row, strains[i]);
    row.insert(row.end(), {format_double(est.estimate), format_double(est.last_decrement),
                           est.subadditive ? "1" : "0", format_double(gap), est.flagged ? "1" : "0"});
    fh.rows.push_back(row);
    if (est.flagged) {
      ++flagged_rows;
      messages.push_back({{"strain_id", i}, {"message", est.message}});
    }
  }
  out.flagged = flagged_rows > 0;
  out.tables["g_k.csv"] = std::move(g);
  out.tables["f_hom.csv"] = std::move(fh);
  out.summary = {{"kind", "homogenize"},
                 {"strain_count", strains.size()},
                 {"k", cfg.ks},
                 {"flagged_rows", flagged_rows},
                 {"messages", messages},
                 {"config", to_json(cfg)},
                 {"provenance", provenance(cfg, seconds_since(t0), times)}};
  return out;
}

ResultBundle run_nonlocal(const ExperimentConfig & cfg, int threads) {
  require_kind(cfg, ExperimentKind::nonlocal);
  const auto t0 = std::chrono::steady_clock::now();
  const auto field = resolve_field(cfg);
  const auto rep = convergence_study(field, cfg.epsilons, cfg.gamma, cfg.quad_nodes, threads);
  const auto k = NonlocalConstants::standard();

  ResultBundle out;
  Table t;
  t.header = {"epsilon", "energy", "limit", "rel_error", "cylinder_count", "count_deficit"};
  int flagged_rows = 0;
  for (const auto & r : rep.rows) {
    t.rows.push_back({format_double(r.epsilon), format_double(r.energy), format_double(r.limit),
                      format_double(r.rel_error), std::to_string(r.cylinder_count), format_double(r.count_deficit)});
    if (!std::isfinite(r.energy)) ++flagged_rows;
  }
  out.flagged = flagged_rows > 0;
  out.tables["convergence.csv"] = std::move(t);
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  out.summary = {{"kind", "nonlocal"},
                 {"gamma", cfg.gamma},
                 {"limit_closed_form", gamma_limit_closed(field, cfg.omega, k)},
                 {"error_slope", finite_or_null(rep.error_slope)},
                 {"energy_slope", finite_or_null(rep.energy_slope)},
                 {"constants", {{"c1", k.c1}, {"c2", k.c2}, {"cell_volume", k.cell_volume}}},
                 {"flagged_rows", flagged_rows},
                 {"config", to_json(cfg)},
                 {"provenance", provenance(cfg, seconds_since(t0), {})}};
  return out;
}

ResultBundle run_properties(const ExperimentConfig & cfg, int /*threads*/) {
  require_kind(cfg, ExperimentKind::properties);
  const auto t0 = std::chrono::steady_clock::now();
  PropertyOptions popt = cfg.properties;
  popt.seed = cfg.seed;
  const auto rep = property_suite(cfg.structure, cfg.integrand, popt, cfg.solver);
  const auto growth = growth_check(cfg.integrand, cfg.growth_samples, cfg.seed, cfg.structure.dim());

  ResultBundle out;
  Table t;
  t.header = {"property", "passed", "value", "detail"};
  for (const auto & r : rep.results) {
    t.rows.push_back({r.name, r.passed ? "1" : "0", format_double(r.value), r.detail});
  }
  t.rows.push_back({"growth", growth.passed() ? "1" : "0", format_double(growth.margin),
                    "alpha=" + format_double(growth.alpha) + " beta=" + format_double(growth.beta)});
  out.flagged = !rep.passed() || !growth.passed();
  out.tables["properties.csv"] = std::move(t);
  json results = json::object();
  for (const auto & r : rep.results) results[r.name] = r.passed;
  results["growth"] = growth.passed();
  out.summary = {{"kind", "properties"},
                 {"passed", !out.flagged},
                 {"results", results},
                 {"config", to_json(cfg)},
                 {"provenance", provenance(cfg, seconds_since(t0), {})}};
  return out;
}

ResultBundle run_experiment(const ExperimentConfig & cfg, int threads) {
  switch (cfg.kind) {
    case ExperimentKind::homogenize: return run_homogenize(cfg, threads);
    case ExperimentKind::nonlocal: return run_nonlocal(cfg, threads);
    case ExperimentKind::properties: return run_properties(cfg, threads);
  }
  throw std::invalid_argument("unknown experiment kind");
}

}  // namespace homlab
