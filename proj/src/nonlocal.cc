#include "homlab/nonlocal.hh"
#include "homlab/parallel.hh"
#include "homlab/quadrature.hh"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace homlab {

NonlocalConstants NonlocalConstants::standard() {
  constexpr double pi = std::numbers::pi;
  return {3.0 * pi / 8.0, pi / 4.0, pi / 16.0};
}

/* ---------------------------------------------------------------------- */
TwoPhaseField::TwoPhaseField(RigidMotion u1, const Rectangle & omega, double eta,
                             const std::function<RigidMotion(const TileIndex &)> & tile_motion)
    : u1_(std::move(u1)), omega_(omega), eta_(eta) {
  if (u1_.dim() != 3) throw std::invalid_argument("TwoPhaseField: u1 must be a 3D rigid motion");
  for (const auto & t : tiles_covering(omega, eta)) {
    RigidMotion m = tile_motion(t);
    if (m.dim() != 3) throw std::invalid_argument("TwoPhaseField: tile motions must be 3D");
    tiles_.emplace(t, std::move(m));
  }
}

TwoPhaseField TwoPhaseField::constant(const RigidMotion & u1, const RigidMotion & u2, const Rectangle & omega,
                                      double eta) {
  return TwoPhaseField(u1, omega, eta, [&](const TileIndex &) { return u2; });
}

const RigidMotion & TwoPhaseField::u2(const TileIndex & tile) const {
  const auto it = tiles_.find(tile);
  if (it == tiles_.end()) {
    throw std::out_of_range("TwoPhaseField: no motion for tile (" + std::to_string(tile[0]) + "," +
                            std::to_string(tile[1]) + ")");
  }
  return it->second;
}

RigidMotion TwoPhaseField::difference(const TileIndex & tile) const { return u1_ - u2(tile); }

Eigen::Vector3d TwoPhaseField::difference_at(const Eigen::Vector3d & x) const {
  const TileIndex t{static_cast<int>(std::floor(x.x() / eta_)), static_cast<int>(std::floor(x.y() / eta_))};
  return difference(t)(Vector(x));
}

TwoPhaseField TwoPhaseField::shifted(const RigidMotion & g) const {
  TwoPhaseField out = *this;
  out.u1_ = u1_ + g;
  for (auto & [t, m] : out.tiles_) m = m + g;
  return out;
}

/* ---------------------------------------------------------------------- */
double lateral_surface_energy(const RigidMotion & diff, const Eigen::Vector2d & center, double r, int quad_nodes) {
  if (!(r > 0.0)) throw std::invalid_argument("lateral_surface_energy: radius must be positive");
  if (quad_nodes < 8) throw std::invalid_argument("lateral_surface_energy: need at least 8 angular nodes");
  if (diff.dim() != 3) throw std::invalid_argument("lateral_surface_energy: motion must be 3D");

  const auto height = gauss_legendre_unit(2);
  const Eigen::Matrix3d R = diff.rotation.matrix();
  const Eigen::Vector3d c = diff.translation;
  double sum = 0.0;
  for (int j = 0; j < quad_nodes; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / quad_nodes;
    const Eigen::Vector3d nu(std::cos(theta), std::sin(theta), 0.0);
    for (std::size_t g = 0; g < height.nodes.size(); ++g) {
      const Eigen::Vector3d x(center.x() + r * nu.x(), center.y() + r * nu.y(), height.nodes[g]);
      const Eigen::Vector3d d = R * x + c;
      const double dn = d.dot(nu);
      // |d ⊙ ν|² with |ν| = 1
      sum += height.weights[g] * 0.5 * (d.squaredNorm() + dn * dn);
    }
  }
  return sum * (2.0 * std::numbers::pi / quad_nodes) * r;
}

EpsilonEnergyReport F_eps_gamma(const TwoPhaseField & field, const CylinderLattice & lattice, double gamma,
                                int quad_nodes, int threads) {
  const TileGrid grid = build_tile_grid(lattice.omega, field.eta(), lattice.epsilon);
  EpsilonEnergyReport rep;
  rep.epsilon = lattice.epsilon;
  rep.gamma = gamma;
  rep.cylinder_count = lattice.cylinders.size();
  rep.per_cylinder.assign(lattice.cylinders.size(), 0.0);

  std::vector<RigidMotion> diffs;
  diffs.reserve(lattice.cylinders.size());
  for (const auto & cyl : lattice.cylinders) {
    const auto tile = grid.tile_of_cylinder(cyl.index);
    try {
      diffs.push_back(field.difference(tile));
    } catch (const std::out_of_range & e) {
      throw std::invalid_argument(std::string("F_eps_gamma: field does not cover the lattice: ") + e.what());
    }
  }
  const double scale = std::pow(lattice.epsilon, gamma - 1.0);
  parallel_for(lattice.cylinders.size(), threads, [&](std::size_t i) {
    rep.per_cylinder[i] =
        scale * lateral_surface_energy(diffs[i], lattice.cylinders[i].center, lattice.radius, quad_nodes);
  });
  for (const double e : rep.per_cylinder) rep.energy += e;
  return rep;
}

double gamma_limit_closed(const TwoPhaseField & field, const Rectangle & omega, const NonlocalConstants & k) {
  const auto rule = gauss_legendre_unit(2);
  double total = 0.0;
  for (const auto & t : tiles_covering(omega, field.eta())) {
    const double eta = field.eta();
    const double x0 = std::max(omega.x0, eta * t[0]);
    const double x1 = std::min(omega.x1, eta * (t[0] + 1));
    const double y0 = std::max(omega.y0, eta * t[1]);
    const double y1 = std::min(omega.y1, eta * (t[1] + 1));
    if (!(x1 > x0) || !(y1 > y0)) continue;
    const RigidMotion d = field.difference(t);
    const double vol = (x1 - x0) * (y1 - y0);
    for (std::size_t a = 0; a < 2; ++a) {
      for (std::size_t b = 0; b < 2; ++b) {
        for (std::size_t c = 0; c < 2; ++c) {
          Vector x(3);
          x << x0 + (x1 - x0) * rule.nodes[a], y0 + (y1 - y0) * rule.nodes[b], rule.nodes[c];
          const Vector v = d(x);
          const double w = rule.weights[a] * rule.weights[b] * rule.weights[c] * vol;
          total += w * (k.c1 * (v(0) * v(0) + v(1) * v(1)) + k.c2 * v(2) * v(2));
        }
      }
    }
  }
  return total;
}

/* ---------------------------------------------------------------------- */
double log_log_slope(const std::vector<double> & xs, const std::vector<double> & ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("log_log_slope: size mismatch");
  std::vector<double> lx;
  std::vector<double> ly;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i] > 0.0 && ys[i] > 0.0 && std::isfinite(xs[i]) && std::isfinite(ys[i])) {
      lx.push_back(std::log(xs[i]));
      ly.push_back(std::log(ys[i]));
    }
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i] / n;
    my += ly[i] / n;
  }
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  return sxy / sxx;
}

ConvergenceReport convergence_study(const TwoPhaseField & field, const std::vector<double> & eps_list,
                                    double gamma, int quad_nodes, int threads) {
  if (eps_list.empty()) throw std::invalid_argument("convergence_study: empty epsilon list");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0) || (i > 0 && !(eps_list[i] < eps_list[i - 1]))) {
      throw std::invalid_argument("convergence_study: epsilon list must be positive and decreasing");
    }
    // validates η = hε before any work is done
    build_tile_grid(field.omega(), field.eta(), eps_list[i]);
  }

  const double closed = gamma_limit_closed(field, field.omega());
  double limit = closed;
  if (gamma > 2.0) limit = 0.0;
  if (gamma < 2.0 && closed > 0.0) limit = std::numeric_limits<double>::infinity();

  ConvergenceReport rep;
  rep.gamma = gamma;
  std::vector<double> eps;
  std::vector<double> errs;
  std::vector<double> energies;
  for (const double e : eps_list) {
    const auto lattice = build_cylinder_lattice(field.omega(), e);
    const auto fe = F_eps_gamma(field, lattice, gamma, quad_nodes, threads);
    ConvergenceRow row;
    row.epsilon = e;
    row.energy = fe.energy;
    row.limit = limit;
    row.rel_error = limit > 0.0 ? std::abs(fe.energy - limit) / limit : std::abs(fe.energy);
    row.cylinder_count = fe.cylinder_count;
    row.count_deficit = 1.0 - e * e * static_cast<double>(fe.cylinder_count) / field.omega().area();
    rep.rows.push_back(row);
    eps.push_back(e);
    errs.push_back(row.rel_error);
    energies.push_back(row.energy);
  }
  rep.error_slope = log_log_slope(eps, errs);
  rep.energy_slope = log_log_slope(eps, energies);
  return rep;
}

/* ---------------------------------------------------------------------- */
SampledField sample_on_grid(const Rectangle & omega, int N,
                            const std::function<Eigen::Vector3d(const Eigen::Vector3d &)> & u) {
  if (N < 1) throw std::invalid_argument("sample_on_grid: need at least one node per axis");
  SampledField s;
  const double w = omega.area() / (static_cast<double>(N) * N * N);
  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i) {
        const Eigen::Vector3d x(omega.x0 + (omega.x1 - omega.x0) * (i + 0.5) / N,
                                omega.y0 + (omega.y1 - omega.y0) * (j + 0.5) / N, (k + 0.5) / N);
        s.points.push_back(x);
        s.values.push_back(u(x));
        s.weights.push_back(w);
      }
    }
  }
  return s;
}

namespace {

Eigen::Matrix<double, 3, 6> rigid_jacobian3(const Eigen::Vector3d & x) {
  Eigen::Matrix<double, 3, 6> J;
  J.leftCols<3>() = -cross_matrix(x);
  J.rightCols<3>().setIdentity();
  return J;
}

}  // namespace

double rigid_fit_objective(const SampledField & u, const RigidMotion & r, const NonlocalConstants & k) {
  if (r.dim() != 3) throw std::invalid_argument("rigid_fit_objective: motion must be 3D");
  double total = 0.0;
  for (std::size_t q = 0; q < u.points.size(); ++q) {
    const Vector d = r(Vector(u.points[q])) - Vector(u.values[q]);
    total += u.weights[q] * (k.c1_tilde() * (d(0) * d(0) + d(1) * d(1)) + k.c2_tilde() * d(2) * d(2));
  }
  return total;
}

RigidProjection project_onto_rigid(const SampledField & u, const NonlocalConstants & k) {
  if (u.points.size() != u.values.size() || u.points.size() != u.weights.size()) {
    throw std::invalid_argument("project_onto_rigid: sample arrays differ in length");
  }
  double wsum = 0.0;
  for (const double w : u.weights) {
    if (w < 0.0) throw std::invalid_argument("project_onto_rigid: negative quadrature weight");
    wsum += w;
  }
  if (!(wsum > 0.0)) throw std::invalid_argument("project_onto_rigid: degenerate quadrature (all weights zero)");

  const Eigen::Vector3d W(k.c1_tilde(), k.c1_tilde(), k.c2_tilde());
  Eigen::Matrix<double, 6, 6> M = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
  for (std::size_t q = 0; q < u.points.size(); ++q) {
    const auto J = rigid_jacobian3(u.points[q]);
    const Eigen::Matrix<double, 6, 3> JtW = J.transpose() * W.asDiagonal();
    M += u.weights[q] * JtW * J;
    rhs += u.weights[q] * JtW * u.values[q];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 6, 6>> es(M, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 1e-12 * es.eigenvalues().maxCoeff())) {
    throw std::invalid_argument("project_onto_rigid: degenerate quadrature (samples do not fix a rigid motion)");
  }
  const Eigen::Matrix<double, 6, 1> p = M.ldlt().solve(rhs);
  RigidProjection out;
  out.motion = RigidMotion::from_axial(p.head<3>(), p.tail<3>());
  out.value = rigid_fit_objective(u, out.motion, k);
  return out;
}

}  // namespace homlab
