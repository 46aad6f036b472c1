#include "homlab/experiment.hh"

#include "doctest.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

using namespace homlab;
using nlohmann::json;

namespace {

ExperimentConfig parse(const char * text) { return config_from_json(json::parse(text)); }

std::vector<std::string> split(const std::string & line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::size_t column(const Table & t, const std::string & name) {
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    if (t.header[i] == name) return i;
  }
  FAIL("no column " << name);
  return 0;
}

const char * kHomogenize = R"({
  "schema_version": 1, "kind": "homogenize", "seed": 5,
  "structure": {"family": "rigid_spring", "n": 2, "k": [1]},
  "integrand": {"type": "pure_power", "exponent": 2},
  "strains": {"explicit": [[[0.5, 0.25], [0.25, -1]]], "count": 6}
})";

const char * kNonlocal = R"({
  "schema_version": 1, "kind": "nonlocal", "gamma": 2,
  "nonlocal": {"omega": [0, 1, 0, 1], "epsilon": [0.25, 0.125, 0.0625], "eta": 1,
               "field": {"u1": {"translation": [0, 0, 1]}}}
})";

const char * kProperties = R"({
  "schema_version": 1, "kind": "properties", "seed": 3,
  "structure": {"family": "rigid_spring", "n": 2},
  "properties": {"samples": 4, "gauge_trials": 50, "coercivity_samples": 16, "growth_samples": 64}
})";

}  // namespace

TEST_CASE("config round trip") {
  const char * rich = R"({
    "schema_version": 1, "kind": "nonlocal", "seed": 12345678901,
    "structure": {"family": "elastic_spring", "m": 3, "interface": false, "k": [1, 2]},
    "integrand": {"type": "quadratic_form", "stiffness": [[2, 0.1, 0], [0.1, 1, 0], [0, 0, 0.7]],
                  "region_weights": {"volume": 1, "interface": 0.25}},
    "strains": {"explicit": [[[0.1, 0.2], [0.2, 0.3]]], "count": 2},
    "gamma": 2.5,
    "nonlocal": {"omega": [0, 1, 0, 0.5], "epsilon": [0.125, 0.0625], "eta": 0.25, "quad_nodes": 32,
                 "field": {"u1": {"rotation": [0.1, 0.2, 0.3], "translation": [1, 2, 3]},
                           "tiles": [{"tile": [1, 0], "translation": [0, 0, 1]}], "random_scale": 0.4}},
    "tolerances": {"gradient_tolerance": 1e-10, "huber_delta": 1e-3},
    "outputs": {"directory": "somewhere", "prefix": "run1_"}
  })";
  for (const char * text : {rich, kHomogenize, kNonlocal, kProperties}) {
    const auto a = parse(text);
    const auto b = config_from_json(to_json(a));
    CHECK(a == b);
    CHECK(to_json(a) == to_json(b));
    CHECK(config_hash(a) == config_hash(b));
  }
  const auto cfg = parse(rich);
  CHECK(cfg.seed == 12345678901ULL);
  CHECK(cfg.field.tile_overrides.size() == 1);
  CHECK(*cfg.field.random_scale == 0.4);
  CHECK(cfg.integrand.region_weight(Region::interface) == 0.25);
}

TEST_CASE("config hash follows every field") {
  const auto base = parse(kNonlocal);
  std::vector<ExperimentConfig> variants(12, base);
  variants[0].seed += 1;
  variants[1].gamma = 3.0;
  variants[2].epsilons.back() = 0.03125;
  variants[3].quad_nodes = 16;
  variants[4].field.u2.translation(0) = 1e-9;
  variants[5].solver.cg_relative_residual = 1e-11;
  variants[6].outputs.prefix = "x";
  variants[7].integrand = Integrand::pure_power(3.0);
  variants[8].structure.m = 5;
  variants[9].properties.gauge_trials = 7;
  variants[10].strain_count = 1;
  variants[11].omega.y1 = 2.0;
  const auto h = config_hash(base);
  for (const auto & v : variants) {
    CHECK_FALSE(v == base);
    CHECK(config_hash(v) != h);
  }
  CHECK(config_hash(parse(kNonlocal)) == h);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse(R"({"schema_version": 2, "kind": "homogenize"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"kind": "homogenize"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"schema_version": 1, "kind": "sweep"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"schema_version": 1, "kind": "homogenize", "strains": {"count": 1}, "colour": 1})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"schema_version": 1, "kind": "homogenize", "strains": {"count": 1},
                           "structure": {"k": []}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"schema_version": 1, "kind": "homogenize"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"schema_version": 1, "kind": "homogenize",
                           "strains": {"explicit": [[[1, 2], [3, 4]]]}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"schema_version": 1, "kind": "nonlocal"})"), std::invalid_argument);
  // ε must divide η
  CHECK_THROWS_AS(parse(R"({"schema_version": 1, "kind": "nonlocal",
                           "nonlocal": {"epsilon": [0.3], "eta": 1}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"schema_version": 1, "kind": "nonlocal",
                           "nonlocal": {"epsilon": [0.25], "field": {"tiles": [{"tile": [5, 5]}]}}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"schema_version": 1, "kind": "properties",
                           "integrand": {"type": "pure_power", "exponent": 0.5}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse(R"({"schema_version": 1, "kind": "properties", "structure": {"n": 3},
                           "integrand": {"type": "quadratic_form", "stiffness": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}})"),
                  std::invalid_argument);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "1.0000000000000001e-01");
  CHECK(std::stod(format_double(std::numbers::pi)) == std::numbers::pi);
  Table t;
  t.header = {"a", "b"};
  t.rows = {{"1", "x, y"}, {"2", "say \"hi\""}};
  CHECK(t.to_csv() == "a,b\n1,\"x, y\"\n2,\"say \"\"hi\"\"\"\n");
}

TEST_CASE("homogenize matches the closed form and is reproducible") {
  const auto cfg = parse(kHomogenize);
  const auto bundle = run_homogenize(cfg);
  CHECK(bundle.exit_code() == 0);
  const auto & g = bundle.tables.at("g_k.csv");
  REQUIRE(g.rows.size() == 7);
  for (const auto & row : g.rows) {
    const double a = std::stod(row[column(g, "A_11")]);
    const double b = std::stod(row[column(g, "A_12")]);
    const double d = std::stod(row[column(g, "A_22")]);
    CHECK(std::stod(row[column(g, "g_k")]) == doctest::Approx(2.0 * (a * a + b * b + d * d)).epsilon(1e-12));
    CHECK(row[column(g, "flagged")] == "0");
  }
  CHECK(g.rows[0][column(g, "A_12")] == format_double(0.25));

  const auto again = run_homogenize(cfg, 3);
  for (const auto & [name, table] : bundle.tables) CHECK(table.to_csv() == again.tables.at(name).to_csv());
  CHECK(bundle.summary["provenance"]["config_hash"] == config_hash(cfg));
  CHECK(bundle.summary["provenance"]["library_version"] == kLibraryVersion);

  auto other = cfg;
  other.seed = 6;
  CHECK(run_homogenize(other).tables.at("g_k.csv").to_csv() != g.to_csv());
}

TEST_CASE("homogenize with zero strain") {
  const auto cfg = parse(R"({"schema_version": 1, "kind": "homogenize",
    "structure": {"family": "elastic_spring", "m": 2, "k": [1, 2]},
    "integrand": {"type": "pure_power", "exponent": 3},
    "strains": {"explicit": [[[0, 0], [0, 0]]]}})");
  const auto bundle = run_homogenize(cfg);
  CHECK(bundle.exit_code() == 0);
  for (const auto & row : bundle.tables.at("g_k.csv").rows) CHECK(std::stod(row[column(bundle.tables.at("g_k.csv"), "g_k")]) == 0.0);
  CHECK(std::stod(bundle.tables.at("f_hom.csv").rows[0][column(bundle.tables.at("f_hom.csv"), "f_hom_estimate")]) == 0.0);
}

TEST_CASE("failed solves are flagged") {
  auto cfg = parse(R"({"schema_version": 1, "kind": "homogenize",
    "structure": {"family": "rigid_spring", "k": [1, 4]},
    "integrand": {"type": "pure_power", "exponent": 3},
    "strains": {"count": 2}, "tolerances": {"max_iterations": 2}})");
  const auto bundle = run_homogenize(cfg);
  CHECK(bundle.flagged);
  CHECK(bundle.exit_code() != 0);
  CHECK(bundle.summary["flagged_rows"].get<int>() > 0);
}

TEST_CASE("nonlocal runs") {
  const auto cfg = parse(kNonlocal);
  const auto bundle = run_nonlocal(cfg);
  CHECK(bundle.exit_code() == 0);
  const auto & t = bundle.tables.at("convergence.csv");
  REQUIRE(t.rows.size() == 3);
  for (const auto & row : t.rows) {
    CHECK(std::stod(row[column(t, "limit")]) == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-14));
    CHECK(std::stod(row[column(t, "energy")]) == doctest::Approx(std::numbers::pi / 4.0).epsilon(1e-12));
  }
  CHECK(bundle.summary["constants"]["c1"].get<double>() == doctest::Approx(3.0 * std::numbers::pi / 8.0));
  CHECK(bundle.summary["constants"]["cell_volume"].get<double>() == doctest::Approx(std::numbers::pi / 16.0));

  auto same = cfg;
  same.field.u1 = RigidMotion(3);
  const auto same_bundle = run_nonlocal(same);
  for (const auto & row : same_bundle.tables.at("convergence.csv").rows) {
    CHECK(std::stod(row[column(t, "energy")]) == 0.0);
  }

  auto cubic = cfg;
  cubic.gamma = 3.0;
  const auto cubic_bundle = run_nonlocal(cubic);
  const auto & rows = cubic_bundle.tables.at("convergence.csv").rows;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::stod(rows[i][column(t, "energy")]) < std::stod(rows[i - 1][column(t, "energy")]));
  }

  const auto random = parse(R"({"schema_version": 1, "kind": "nonlocal", "seed": 9,
    "nonlocal": {"epsilon": [0.25, 0.125], "eta": 0.5, "field": {"random_scale": 1}}})");
  CHECK(run_nonlocal(random).tables.at("convergence.csv").to_csv() ==
        run_nonlocal(random, 2).tables.at("convergence.csv").to_csv());
  const auto f1 = resolve_field(random);
  CHECK(f1.tiles().size() == 4);
  CHECK(f1.u2({0, 0}).parameters() != f1.u2({1, 0}).parameters());
}

TEST_CASE("property runs") {
  const auto cfg = parse(kProperties);
  const auto bundle = run_properties(cfg);
  CHECK(bundle.exit_code() == 0);
  const auto & t = bundle.tables.at("properties.csv");
  std::vector<std::string> names;
  for (const auto & row : t.rows) names.push_back(row[0]);
  for (const char * name : {"gauge_invariance", "homogeneity", "convexity", "bounds", "coercivity", "growth"}) {
    CHECK(std::find(names.begin(), names.end(), name) != names.end());
  }

  auto reseeded = cfg;
  reseeded.seed = 77;
  const auto other = run_properties(reseeded);
  CHECK(other.exit_code() == 0);
  CHECK(other.tables.at("properties.csv").to_csv() != t.to_csv());

  const auto degenerate = parse(R"({"schema_version": 1, "kind": "properties",
    "integrand": {"type": "quadratic_form", "stiffness": [[1, 0, 0], [0, 1, 0], [0, 0, 0]]},
    "properties": {"samples": 2, "gauge_trials": 5, "coercivity_samples": 4, "growth_samples": 16}})");
  const auto failed = run_properties(degenerate);
  CHECK(failed.exit_code() != 0);
  CHECK(failed.summary["results"]["growth"] == false);

  CHECK_THROWS_AS(run_nonlocal(cfg), std::invalid_argument);
}

TEST_CASE("bundles are written to disk") {
  const auto dir = std::filesystem::temp_directory_path() / "homlab_bundle_test";
  std::filesystem::remove_all(dir);
  const auto bundle = run_nonlocal(parse(kNonlocal));
  bundle.write(dir, "p_");
  std::ifstream csv(dir / "p_convergence.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(split(header) == bundle.tables.at("convergence.csv").header);
  std::ifstream summary(dir / "p_summary.json");
  const auto j = json::parse(summary);
  CHECK(j["kind"] == "nonlocal");
  CHECK(config_from_json(j["config"]) == parse(kNonlocal));
  std::filesystem::remove_all(dir);
}
