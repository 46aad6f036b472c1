#include "homlab/cell_solver.hh"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace homlab {

bool PropertyReport::passed() const {
  return std::all_of(results.begin(), results.end(), [](const auto & r) { return r.passed; });
}

const PropertyResult * PropertyReport::find(const std::string & name) const {
  for (const auto & r : results) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

namespace {

SymMatrix random_strain(int n, std::mt19937_64 & rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SymMatrix A(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) A.set(i, j, u(rng));
  }
  return A;
}

RigidMotion random_motion(int n, std::mt19937_64 & rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector p(RigidMotion::parameter_count(n));
  for (Eigen::Index i = 0; i < p.size(); ++i) p(i) = u(rng);
  return RigidMotion::from_parameters(n, {p.data(), static_cast<std::size_t>(p.size())});
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

PropertyReport property_suite(const StructureSpec & spec, const Integrand & f, const PropertyOptions & popt,
                              const SolverOptions & options) {
  if (!f.is_convex()) throw std::invalid_argument("property_suite: integrand is not convex");
  const int n = spec.dim();
  const auto structure = spec.build(popt.k);
  std::mt19937_64 rng(popt.seed);
  PropertyReport rep;

  int failed_solves = 0;
  auto g_of = [&](const SymMatrix & A) {
    CellProblem pb(structure, f, A, spec.face_quadrature);
    const auto r = solve(pb, options);
    if (!r.converged) ++failed_solves;
    return r.g;
  };

  // (a) gauge invariance of the assembled energy
  {
    std::normal_distribution<double> normal(0.0, 0.5);
    double worst = 0.0;
    for (int t = 0; t < popt.gauge_trials; ++t) {
      CellProblem pb(structure, f, random_strain(n, rng), spec.face_quadrature);
      DofVector u = pb.zero_dofs();
      for (Eigen::Index i = 0; i < u.values.size(); ++i) u.values(i) = normal(rng);
      const RigidMotion g = random_motion(n, rng);
      const double e0 = assemble_energy(pb, u).energy;
      CellProblem shifted = pb;
      shifted.frame_rotation += g.rotation;
      const double e1 = assemble_energy(shifted, add_global_rigid_motion(pb, u, g)).energy;
      worst = std::max(worst, std::abs(e1 - e0));
    }
    rep.results.push_back({"gauge_invariance", worst < 1e-12, worst,
                           "max |ΔE| under a global rigid shift over " + std::to_string(popt.gauge_trials) +
                               " trials"});
  }

  std::vector<SymMatrix> samples;
  for (int s = 0; s < popt.samples; ++s) samples.push_back(random_strain(n, rng));
  std::vector<double> g_samples;
  for (const auto & A : samples) g_samples.push_back(g_of(A));
  const double p = f.exponent();

  // (b) positive homogeneity
  if (f.is_pure_power()) {
    double worst = 0.0;
    for (std::size_t s = 0; s < samples.size(); ++s) {
      for (const double t : {0.5, 2.0, 10.0}) {
        const double expected = std::pow(t, p) * g_samples[s];
        const double got = g_of(t * samples[s]);
        const double err = std::abs(got - expected) / std::max(std::abs(expected), 1e-300);
        worst = std::max(worst, expected == 0.0 ? std::abs(got) : err);
      }
    }
    rep.results.push_back({"homogeneity", worst <= 1e-6, worst, "max relative error of g(tA) vs t^p g(A)"});
  } else {
    rep.results.push_back({"homogeneity", true, 0.0, "not applicable: integrand is not a pure power"});
  }

  // (c) midpoint convexity of g_k
  {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s + 1 < samples.size(); s += 2) {
      const double mid = g_of(0.5 * (samples[s] + samples[s + 1]));
      const double chord = 0.5 * (g_samples[s] + g_samples[s + 1]);
      worst = std::max(worst, (mid - chord) / std::max(1.0, chord));
    }
    if (samples.size() < 2) worst = 0.0;
    rep.results.push_back({"convexity", worst <= 1e-9, worst, "max (g(mid) - chord) / max(1, chord)"});
  }

  // (d) growth lower bound and competitor upper bound
  {
    double worst_lower = std::numeric_limits<double>::infinity();
    double worst_upper = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const auto & A = samples[s];
      const double g = g_samples[s];
      const double lower = f.alpha() * std::pow(A.norm(), p);
      CellProblem pb(structure, f, A, spec.face_quadrature);
      DofVector z = std::visit([&](const auto & c) { return competitor_field(c, A); }, *structure);
      const double upper = assemble_energy(pb, z).energy;
      worst_lower = std::min(worst_lower, g - lower);
      worst_upper = std::max(worst_upper, g - upper);
    }
    const bool ok = worst_lower >= -1e-10 && worst_upper <= 1e-10;
    rep.results.push_back({"bounds", ok, std::min(worst_lower, -worst_upper),
                           "min(g - α|A|^p) = " + fmt(worst_lower) + ", max(g - E(competitor)) = " +
                               fmt(worst_upper)});
  }

  // (e) coercivity: g_k stays away from zero on the unit sphere
  {
    double gmin = std::numeric_limits<double>::infinity();
    for (int s = 0; s < popt.coercivity_samples; ++s) {
      SymMatrix A = random_strain(n, rng);
      A *= 1.0 / A.norm();
      gmin = std::min(gmin, g_of(A));
    }
    rep.results.push_back({"coercivity", gmin > 1e-12, gmin, "min g over unit-norm strains"});
  }

  rep.results.push_back({"solver_convergence", failed_solves == 0, static_cast<double>(failed_solves),
                         "number of cell solves that missed their tolerance"});
  return rep;
}

}  // namespace homlab
