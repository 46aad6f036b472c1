/**
 * @file   nonlocal.hh
 *
 * @brief  Energies of displacements that are rigid on the matrix phase and
 *         on each of the vertical cylinders of a CylinderLattice, scaled as
 *
 *           F^γ_ε(u) = ε^γ ∫ |dEu/dμ_ε|² dμ_ε,   μ_ε = ε H²⌞(lateral cylinder surfaces),
 *
 *         together with their γ = 2 limit, which couples the two phases
 *         through a zeroth-order term
 *
 *           F(u1, u2) = c1 ∫ |(u1 - u2)_α|² + c2 ∫ |(u1 - u2)_3|²,  c1 = 3π/8, c2 = π/4,
 *
 *         and the single-field energy obtained by minimizing over the
 *         rigid motion of the matrix.
 */
#ifndef HOMLAB_NONLOCAL_HH_
#define HOMLAB_NONLOCAL_HH_

#include "homlab/cell_structure.hh"
#include "homlab/tensor.hh"

#include <array>
#include <functional>
#include <map>
#include <vector>

namespace homlab {

struct NonlocalConstants {
  double c1{};
  double c2{};
  //! |E|: volume of the unit-height cylinder of radius 1/4
  double cell_volume{};

  static NonlocalConstants standard();
  double c1_tilde() const { return c1 / (cell_volume * cell_volume); }
  double c2_tilde() const { return c2 / (cell_volume * cell_volume); }
};

using TileIndex = std::array<int, 2>;

/**
 * A rigid motion u1 of the matrix and a piecewise-rigid field u2, one 3D
 * rigid motion per η-tile of ω × (0,1).
 */
class TwoPhaseField {
 public:
  TwoPhaseField(RigidMotion u1, const Rectangle & omega, double eta,
                const std::function<RigidMotion(const TileIndex &)> & tile_motion);
  static TwoPhaseField constant(const RigidMotion & u1, const RigidMotion & u2, const Rectangle & omega, double eta);

  const RigidMotion & u1() const { return u1_; }
  double eta() const { return eta_; }
  const Rectangle & omega() const { return omega_; }
  const std::map<TileIndex, RigidMotion> & tiles() const { return tiles_; }
  //! throws std::out_of_range for a tile outside the covering of ω
  const RigidMotion & u2(const TileIndex & tile) const;
  //! u1 - u2 on the tile
  RigidMotion difference(const TileIndex & tile) const;
  //! u1(x) - u2(x)
  Eigen::Vector3d difference_at(const Eigen::Vector3d & x) const;

  //! adds g to both phases
  TwoPhaseField shifted(const RigidMotion & g) const;

 private:
  RigidMotion u1_;
  Rectangle omega_;
  double eta_;
  std::map<TileIndex, RigidMotion> tiles_;
};

/**
 * ∫ |(d(x)) ⊙ ν|² dH² over the lateral surface of the cylinder of radius r
 * and height 1 around the vertical axis through `center`. Trapezoid rule
 * in the angle (exact for trigonometric polynomials of degree < quad_nodes),
 * two-point Gauss in the height (exact for the quadratic x3 dependence).
 */
double lateral_surface_energy(const RigidMotion & diff, const Eigen::Vector2d & center, double r,
                              int quad_nodes = 64);

struct EpsilonEnergyReport {
  double epsilon{};
  double gamma{};
  double energy{};
  std::vector<double> per_cylinder;
  std::size_t cylinder_count{};
};

//! ε^{γ-1} Σ_i lateral_surface_energy(u1 - u2(tile of i), x_i, ε/4)
EpsilonEnergyReport F_eps_gamma(const TwoPhaseField & field, const CylinderLattice & lattice, double gamma,
                                int quad_nodes = 64, int threads = 1);

//! exact value of the γ = 2 limit energy on ω × (0,1)
double gamma_limit_closed(const TwoPhaseField & field, const Rectangle & omega,
                          const NonlocalConstants & constants = NonlocalConstants::standard());

struct ConvergenceRow {
  double epsilon{};
  double energy{};
  double limit{};
  //! |energy - limit| / limit, or |energy| when the limit vanishes
  double rel_error{};
  std::size_t cylinder_count{};
  //! 1 - ε² · count / |ω|
  double count_deficit{};
};

struct ConvergenceReport {
  double gamma{};
  std::vector<ConvergenceRow> rows;
  //! least-squares slope of log(rel_error) against log(ε) over rows with nonzero error
  double error_slope{};
  //! least-squares slope of log(energy) against log(ε) over rows with nonzero energy
  double energy_slope{};
};

/**
 * F^γ_ε along a decreasing ε ladder, each ε dividing the field's tile
 * size. The limit column is the closed form for γ = 2, zero for γ > 2 and
 * +∞ (unless the closed form vanishes) for γ < 2.
 */
ConvergenceReport convergence_study(const TwoPhaseField & field, const std::vector<double> & eps_list,
                                    double gamma = 2.0, int quad_nodes = 64, int threads = 1);

//! slope of the least-squares line through (log x, log y); NaN with fewer than two points
double log_log_slope(const std::vector<double> & xs, const std::vector<double> & ys);

struct SampledField {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> values;
  std::vector<double> weights;
};

//! midpoint samples of u on an N x N x N grid of ω × (0,1)
SampledField sample_on_grid(const Rectangle & omega, int nodes_per_axis,
                            const std::function<Eigen::Vector3d(const Eigen::Vector3d &)> & u);

struct RigidProjection {
  RigidMotion motion{3};
  double value{};
};

/**
 * inf over rigid r of c̃1 Σ w |r_α - u_α|² + c̃2 Σ w |r_3 - u_3|², solved
 * through the 6 x 6 normal equations. Throws std::invalid_argument when
 * the quadrature does not determine a unique rigid motion.
 */
RigidProjection project_onto_rigid(const SampledField & u,
                                   const NonlocalConstants & constants = NonlocalConstants::standard());

//! the same objective evaluated directly at a given rigid motion
double rigid_fit_objective(const SampledField & u, const RigidMotion & r,
                           const NonlocalConstants & constants = NonlocalConstants::standard());

}  // namespace homlab

#endif  // HOMLAB_NONLOCAL_HH_
