#include "homlab/nonlocal.hh"

#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

using namespace homlab;

namespace {

constexpr double pi = std::numbers::pi;
const Rectangle unit_square{0.0, 1.0, 0.0, 1.0};

RigidMotion motion(const Eigen::Vector3d & a, const Eigen::Vector3d & b) { return RigidMotion::from_axial(a, b); }

RigidMotion random_motion(std::mt19937_64 & rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return motion({u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)});
}

//! composite Simpson in θ and x3 of |d ⊙ ν|², with d⊙ν formed as an explicit matrix
double lateral_by_simpson(const RigidMotion & d, const Eigen::Vector2d & c, double r, int n) {
  auto weight = [n](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  double total = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double theta = 2.0 * pi * i / n;
    Eigen::Vector3d nu(std::cos(theta), std::sin(theta), 0.0);
    for (int j = 0; j <= n; ++j) {
      Vector x(3);
      x << c.x() + r * nu.x(), c.y() + r * nu.y(), static_cast<double>(j) / n;
      const Eigen::Vector3d v = d(x);
      const Eigen::Matrix3d s = 0.5 * (v * nu.transpose() + nu * v.transpose());
      total += weight(i) * weight(j) * s.squaredNorm();
    }
  }
  return total * (2.0 * pi / (3.0 * n)) * (1.0 / (3.0 * n)) * r;
}

}  // namespace

TEST_CASE("constants") {
  const auto k = NonlocalConstants::standard();
  CHECK(k.c1 == doctest::Approx(3.0 * pi / 8.0).epsilon(1e-15));
  CHECK(k.c2 == doctest::Approx(pi / 4.0).epsilon(1e-15));
  CHECK(k.cell_volume == doctest::Approx(pi * 0.25 * 0.25).epsilon(1e-15));
  CHECK(k.c1 == doctest::Approx(6.0 * k.cell_volume).epsilon(1e-15));
  CHECK(k.c2 == doctest::Approx(4.0 * k.cell_volume).epsilon(1e-15));
}

TEST_CASE("lateral surface integrals") {
  const double r = 0.25;
  const Eigen::Vector2d origin(0.0, 0.0);
  CHECK(std::abs(lateral_surface_energy(motion({0, 0, 0}, {0, 0, 1}), origin, r) - pi / 4.0) <= 1e-10);
  CHECK(std::abs(lateral_surface_energy(motion({0, 0, 0}, {1, 0, 0}), origin, r) - 3.0 * pi / 8.0) <= 1e-10);
  CHECK(std::abs(lateral_surface_energy(motion({0, 0, 1}, {0, 0, 0}), origin, r) - pi * r * r * r) <= 1e-10);

  // the trapezoid rule is exact from 8 nodes on, so refining changes nothing
  std::mt19937_64 rng(31);
  for (int t = 0; t < 10; ++t) {
    const auto d = random_motion(rng);
    const Eigen::Vector2d c(0.3 * t, -0.1 * t);
    const double e8 = lateral_surface_energy(d, c, 0.1, 8);
    const double e64 = lateral_surface_energy(d, c, 0.1, 64);
    CHECK(e8 == doctest::Approx(e64).epsilon(1e-13));
    CHECK(e64 == doctest::Approx(lateral_by_simpson(d, c, 0.1, 400)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(lateral_surface_energy(RigidMotion(3), origin, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(lateral_surface_energy(RigidMotion(3), origin, 0.1, 4), std::invalid_argument);
}

TEST_CASE("epsilon energies of constant differences") {
  const auto zero = TwoPhaseField::constant(RigidMotion(3), RigidMotion(3), unit_square, 1.0);
  CHECK(F_eps_gamma(zero, build_cylinder_lattice(unit_square, 0.125), 2.0).energy == 0.0);
  CHECK(gamma_limit_closed(zero, unit_square) == 0.0);

  const auto e1 = TwoPhaseField::constant(motion({0, 0, 0}, {1, 0, 0}), RigidMotion(3), unit_square, 1.0);
  const auto e3 = TwoPhaseField::constant(motion({0, 0, 0}, {0, 0, 1}), RigidMotion(3), unit_square, 1.0);
  CHECK(gamma_limit_closed(e1, unit_square) == doctest::Approx(3.0 * pi / 8.0).epsilon(1e-14));
  CHECK(gamma_limit_closed(e3, unit_square) == doctest::Approx(pi / 4.0).epsilon(1e-14));

  // on a rectangle that the lattice does not tile, energy = limit · ε² count / |ω|
  const Rectangle odd{0.0, 0.9, 0.0, 0.7};
  const auto odd_e3 = TwoPhaseField::constant(motion({0, 0, 0}, {0, 0, 1}), RigidMotion(3), odd, 1.0);
  const double limit = gamma_limit_closed(odd_e3, odd);
  CHECK(limit == doctest::Approx(pi / 4.0 * odd.area()).epsilon(1e-14));
  for (int m = 2; m <= 6; ++m) {
    const double eps = std::ldexp(1.0, -m);
    const auto lat = build_cylinder_lattice(odd, eps);
    const auto rep = F_eps_gamma(odd_e3, lat, 2.0);
    const double expected = limit * eps * eps * static_cast<double>(lat.cylinders.size()) / odd.area();
    CHECK(std::abs(rep.energy - expected) <= 1e-12);
    CHECK(rep.per_cylinder.size() == lat.cylinders.size());
    // one more power of ε
    CHECK(F_eps_gamma(odd_e3, lat, 3.0).energy == doctest::Approx(eps * rep.energy).epsilon(1e-13));
  }
}

TEST_CASE("limit energy of a rotation") {
  // u1 - u2 = e3 ∧ x has horizontal part (-y, x): c1 ∫ x² + y² = c1 · 2/3
  const auto rot = TwoPhaseField::constant(motion({0, 0, 1}, {0, 0, 0}), RigidMotion(3), unit_square, 0.5);
  CHECK(gamma_limit_closed(rot, unit_square) == doctest::Approx(3.0 * pi / 8.0 * 2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("energies are unchanged by a common rigid motion") {
  std::mt19937_64 rng(32);
  const Rectangle om{0.0, 1.0, 0.0, 0.5};
  for (int t = 0; t < 5; ++t) {
    const TwoPhaseField field(random_motion(rng), om, 0.25,
                              [&](const TileIndex &) { return random_motion(rng); });
    const auto shifted = field.shifted(random_motion(rng, 3.0));
    for (double eps : {0.125, 0.0625}) {
      const auto lat = build_cylinder_lattice(om, eps);
      CHECK(std::abs(F_eps_gamma(field, lat, 2.0).energy - F_eps_gamma(shifted, lat, 2.0).energy) <= 1e-12);
    }
    CHECK(std::abs(gamma_limit_closed(field, om) - gamma_limit_closed(shifted, om)) <= 1e-12);
  }
}

TEST_CASE("threads do not change the result") {
  std::mt19937_64 rng(33);
  const TwoPhaseField field(random_motion(rng), unit_square, 0.25,
                            [&](const TileIndex &) { return random_motion(rng); });
  const auto lat = build_cylinder_lattice(unit_square, 1.0 / 32.0);
  const auto serial = F_eps_gamma(field, lat, 2.0, 64, 1);
  const auto threaded = F_eps_gamma(field, lat, 2.0, 64, 4);
  CHECK(serial.energy == threaded.energy);
  CHECK(serial.per_cylinder == threaded.per_cylinder);
}

TEST_CASE("incompatible inputs") {
  const auto field = TwoPhaseField::constant(RigidMotion(3), RigidMotion(3), unit_square, 0.25);
  CHECK_THROWS_AS(F_eps_gamma(field, build_cylinder_lattice(unit_square, 0.1), 2.0), std::invalid_argument);
  CHECK_THROWS_AS(convergence_study(field, {0.125, 0.1}), std::invalid_argument);
  CHECK_THROWS_AS(convergence_study(field, {0.0625, 0.125}), std::invalid_argument);
  // a lattice on a larger domain than the field covers
  CHECK_THROWS_AS(F_eps_gamma(field, build_cylinder_lattice({0.0, 2.0, 0.0, 1.0}, 0.125), 2.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(field.u2({7, 7}), std::out_of_range);
  CHECK_THROWS_AS(TwoPhaseField::constant(RigidMotion(2), RigidMotion(3), unit_square, 1.0), std::invalid_argument);
}

TEST_CASE("convergence studies") {
  std::vector<double> eps;
  for (int m = 2; m <= 6; ++m) eps.push_back(std::ldexp(1.0, -m));

  const auto zero = TwoPhaseField::constant(RigidMotion(3), RigidMotion(3), unit_square, 1.0);
  for (const auto & row : convergence_study(zero, eps).rows) CHECK(row.rel_error == 0.0);

  // constant difference: the error is the count deficit
  const Rectangle odd{0.0, 1.0, 0.0, 0.6};
  const auto e1 = TwoPhaseField::constant(motion({0, 0, 0}, {1, 0, 0}), RigidMotion(3), odd, 1.0);
  for (const auto & row : convergence_study(e1, eps).rows) {
    CHECK(std::abs(row.rel_error - std::abs(row.count_deficit)) <= 1e-12);
    CHECK(row.cylinder_count == build_cylinder_lattice(odd, row.epsilon).cylinders.size());
  }

  // piecewise rigid on η = 1/4 tiles
  std::mt19937_64 rng(34);
  const TwoPhaseField tiled(random_motion(rng), unit_square, 0.25,
                            [&](const TileIndex &) { return random_motion(rng); });
  const auto rep = convergence_study(tiled, eps);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].rel_error < rep.rows[i - 1].rel_error);

  const auto nul = convergence_study(e1, eps, 3.0);
  for (const auto & row : nul.rows) CHECK(row.limit == 0.0);
  CHECK(nul.energy_slope == doctest::Approx(1.0).epsilon(0.1));
  const auto blowup = convergence_study(e1, eps, 1.5);
  CHECK(std::isinf(blowup.rows.front().limit));
}

TEST_CASE("log-log slope") {
  CHECK(log_log_slope({1.0, 2.0, 4.0}, {3.0, 12.0, 48.0}) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::isnan(log_log_slope({1.0}, {1.0})));
  CHECK_THROWS_AS(log_log_slope({1.0, 2.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("projection onto rigid motions") {
  const auto k = NonlocalConstants::standard();
  const Rectangle om{0.0, 1.0, 0.0, 1.0};

  std::mt19937_64 rng(35);
  for (int t = 0; t < 5; ++t) {
    const auto m = random_motion(rng, 2.0);
    const auto s = sample_on_grid(om, 4, [&](const Eigen::Vector3d & x) -> Eigen::Vector3d { return m(Vector(x)); });
    const auto p = project_onto_rigid(s, k);
    CHECK((p.motion.parameters() - m.parameters()).norm() <= 1e-10);
    CHECK(p.value <= 1e-20);
  }

  auto identity = sample_on_grid(om, 6, [](const Eigen::Vector3d & x) { return x; });
  double wsum = 0.0;
  for (double w : identity.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-14));
  const auto pid = project_onto_rigid(identity, k);
  CHECK(pid.motion.rotation.axial().norm() <= 1e-12);
  CHECK((pid.motion.translation - Eigen::Vector3d(0.5, 0.5, 0.5)).norm() <= 1e-12);

  // quadratic in u, invariant under adding a rigid motion to u and the answer
  auto scaled = identity;
  for (auto & v : scaled.values) v *= 3.0;
  CHECK(project_onto_rigid(scaled, k).value == doctest::Approx(9.0 * pid.value).epsilon(1e-12));
  const auto g = random_motion(rng);
  auto moved = identity;
  for (std::size_t q = 0; q < moved.values.size(); ++q) moved.values[q] += Eigen::Vector3d(g(Vector(moved.points[q])));
  const auto pm = project_onto_rigid(moved, k);
  CHECK(pm.value == doctest::Approx(pid.value).epsilon(1e-12));
  CHECK(((pm.motion - g).parameters() - pid.motion.parameters()).norm() <= 1e-10);
  CHECK(rigid_fit_objective(moved, pid.motion + g, k) == doctest::Approx(pm.value).epsilon(1e-12));

  auto degenerate = identity;
  for (auto & w : degenerate.weights) w = 0.0;
  CHECK_THROWS_AS(project_onto_rigid(degenerate, k), std::invalid_argument);
  SampledField collinear;
  for (int i = 0; i < 5; ++i) {
    collinear.points.emplace_back(0.1 * i, 0.0, 0.0);
    collinear.values.emplace_back(1.0, 0.0, 0.0);
    collinear.weights.push_back(1.0);
  }
  CHECK_THROWS_AS(project_onto_rigid(collinear, k), std::invalid_argument);
}
