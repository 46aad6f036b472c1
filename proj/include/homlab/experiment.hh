/**
 * @file   experiment.hh
 *
 * @brief  JSON experiment configurations and the runners that turn them
 *         into CSV tables plus a JSON summary.
 *
 * A configuration looks like
 *
 *   {
 *     "schema_version": 1,
 *     "kind": "homogenize",
 *     "seed": 7,
 *     "structure": {"family": "rigid_spring", "n": 2, "k": [1, 2, 4]},
 *     "integrand": {"type": "pure_power", "exponent": 2},
 *     "strains": {"count": 10}
 *   }
 *
 * Missing fields take the defaults of ExperimentConfig; `to_json` always
 * writes every field, so a serialized config is self-contained.
 */
#ifndef HOMLAB_EXPERIMENT_HH_
#define HOMLAB_EXPERIMENT_HH_

#include "homlab/cell_solver.hh"
#include "homlab/nonlocal.hh"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace homlab {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char * kLibraryVersion = "0.1.0";

enum class ExperimentKind { homogenize, nonlocal, properties };
std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string & s);

//! the two-phase field of a nonlocal run: u2 is `u2` on every tile unless overridden or randomized
struct NonlocalFieldSpec {
  RigidMotion u1{3};
  RigidMotion u2{3};
  std::map<TileIndex, RigidMotion> tile_overrides;
  //! when set, u2 on every tile without an override is drawn uniformly with parameters in ±scale
  std::optional<double> random_scale;

  friend bool operator==(const NonlocalFieldSpec & a, const NonlocalFieldSpec & b);
};

struct OutputSpec {
  std::string directory{"results"};
  std::string prefix;
  friend bool operator==(const OutputSpec &, const OutputSpec &) = default;
};

struct ExperimentConfig {
  int schema_version{kSchemaVersion};
  ExperimentKind kind{ExperimentKind::homogenize};
  std::uint64_t seed{1};

  StructureSpec structure;
  std::vector<int> ks{1};
  Integrand integrand{Integrand::pure_power(2.0)};

  //! explicit strains; `strain_count` more are drawn with entries uniform in [-1, 1]
  std::vector<SymMatrix> strains;
  int strain_count{0};

  double gamma{2.0};
  Rectangle omega{0.0, 1.0, 0.0, 1.0};
  std::vector<double> epsilons;
  double eta{1.0};
  int quad_nodes{64};
  NonlocalFieldSpec field;

  SolverOptions solver;
  PropertyOptions properties;
  int growth_samples{256};

  OutputSpec outputs;

  friend bool operator==(const ExperimentConfig & a, const ExperimentConfig & b);
};

nlohmann::json to_json(const ExperimentConfig & cfg);
//! parses and validates; throws std::invalid_argument with the offending field in the message
ExperimentConfig config_from_json(const nlohmann::json & j);
ExperimentConfig load_config(const std::filesystem::path & path);
//! throws std::invalid_argument describing the first problem found
void validate(const ExperimentConfig & cfg);

//! FNV-1a 64 of the canonical serialization, as 16 hex digits
std::string config_hash(const ExperimentConfig & cfg);

//! explicit strains followed by `strain_count` random ones drawn from `seed`
std::vector<SymMatrix> resolve_strains(const ExperimentConfig & cfg);
TwoPhaseField resolve_field(const ExperimentConfig & cfg);

nlohmann::json to_json(const Integrand & f);
Integrand integrand_from_json(const nlohmann::json & j);
nlohmann::json to_json(const RigidMotion & m);
RigidMotion rigid_motion_from_json(const nlohmann::json & j, int n);

/* ---------------------------------------------------------------------- */
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

//! %.16e, i.e. 17 significant digits
std::string format_double(double v);

struct ResultBundle {
  //! file name (without prefix) → table
  std::map<std::string, Table> tables;
  nlohmann::json summary;
  bool flagged{};

  int exit_code() const { return flagged ? 1 : 0; }
  //! writes the tables and `summary.json` under `directory`, each name prefixed by `prefix`
  void write(const std::filesystem::path & directory, const std::string & prefix = "") const;
};

ResultBundle run_homogenize(const ExperimentConfig & cfg, int threads = 1);
ResultBundle run_nonlocal(const ExperimentConfig & cfg, int threads = 1);
ResultBundle run_properties(const ExperimentConfig & cfg, int threads = 1);
ResultBundle run_experiment(const ExperimentConfig & cfg, int threads = 1);

}  // namespace homlab

#endif  // HOMLAB_EXPERIMENT_HH_
