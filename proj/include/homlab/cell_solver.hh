/**
 * @file   cell_solver.hh
 *
 * @brief  Cell problems for periodic structures: for a strain A the cell
 *         value
 *
 *           g_k(A) = inf { k^{-n} ∫_{[0,k)^n} f(x, dEu/dμ) dμ : u - Ax k-periodic },
 *
 *         its minimization, the doubling sequence that bounds the
 *         homogenized density f_hom(A) from above, and numerical checks of
 *         the structural properties of g_k.
 *
 * DOF conventions. Rigid-spring cells store, per block, the rigid motion
 * u_b(x) = R_b x + c_b of the full displacement (skew parameters first,
 * then the translation); the affine datum enters through the faces that
 * wrap around the period cell. Elastic cells store the periodic corrector
 * v = u - Ax at the mesh nodes.
 */
#ifndef HOMLAB_CELL_SOLVER_HH_
#define HOMLAB_CELL_SOLVER_HH_

#include "homlab/cell_structure.hh"
#include "homlab/integrand.hh"

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace homlab {

using CellStructure = std::variant<RigidSpringCell, ElasticSpringCell>;

enum class Family { rigid_spring, elastic_spring };

std::string to_string(Family f);
Family family_from_string(const std::string & s);

//! parameters of a structure family, independent of the period k
struct StructureSpec {
  Family family{Family::rigid_spring};
  int n{2};
  int m{4};               //!< elastic only: elements per cube edge
  bool interface{true};   //!< elastic only: springs between the cubes
  int face_quadrature{0}; //!< rigid only: Gauss points per face direction, 0 = automatic

  std::shared_ptr<const CellStructure> build(int k) const;
  int dim() const { return family == Family::elastic_spring ? 2 : n; }
  friend bool operator==(const StructureSpec &, const StructureSpec &) = default;
};

struct CellProblem {
  CellProblem(std::shared_ptr<const CellStructure> structure, Integrand integrand, SymMatrix strain,
              int face_quadrature = 0);

  std::shared_ptr<const CellStructure> structure;
  Integrand integrand;
  SymMatrix strain;
  //! skew part W of the affine datum u - (A + W)x periodic; zero for g_k itself
  SkewMatrix frame_rotation;
  int face_quadrature{0};

  int dim() const;
  int period() const;
  int dof_count() const;
  DofVector zero_dofs() const;
  //! Gauss points per direction on rigid-spring faces (2 is exact for quadratic f)
  int face_points() const;
  //! DOFs held at zero to remove the translation null space
  std::vector<int> pinned_dofs() const;
};

struct EnergyEvaluation {
  double energy{};
  Vector gradient;
};

/**
 * Cell energy per unit volume and its gradient with respect to the DOFs.
 * For p == 1 a positive `huber_delta` evaluates the Huber-smoothed energy.
 */
EnergyEvaluation assemble_energy(const CellProblem & problem, const DofVector & u, double huber_delta = 0.0);

struct SolverOptions {
  double cg_relative_residual{1e-12};
  double gradient_tolerance{1e-9};
  double subadditivity_slack{1e-8};
  int max_iterations{20000};
  double huber_delta{1e-4};
  bool record_history{false};
};

struct SolveReport {
  double g{};
  int iterations{};
  //! relative CG residual (quadratic path) or gradient norm (descent path)
  double residual{};
  double wall_time{};
  bool converged{};
  std::string method;
  std::string message;
  DofVector minimizer;
  //! upper bound on |smoothed - exact| energy for p == 1, else 0
  double smoothing_gap_bound{};
  //! energies of accepted iterates when SolverOptions::record_history is set; for p == 1
  //! the history runs through a decreasing sequence of smoothing parameters
  std::vector<double> energy_history;
};

/**
 * Minimizes the cell energy. Quadratic integrands go through conjugate
 * gradients on the gauge-reduced system; other exponents use L-BFGS with
 * Armijo backtracking. A run that misses its tolerance returns
 * converged == false with an explanatory message.
 */
SolveReport solve(const CellProblem & problem, const SolverOptions & options = {});

struct FhomEstimate {
  std::vector<int> ks;
  std::vector<SolveReport> reports;
  //! min_k g_k(A): an upper estimate of f_hom(A)
  double estimate{};
  //! g at the second-to-last k minus g at the last k
  double last_decrement{};
  bool subadditive{true};
  bool flagged{};
  std::string message;
};

FhomEstimate f_hom_estimate(const StructureSpec & spec, const Integrand & f, const SymMatrix & A,
                            const std::vector<int> & ks, const SolverOptions & options = {});

struct PropertyResult {
  std::string name;
  bool passed{};
  //! the statistic the decision is based on (worst error, minimum, ...)
  double value{};
  std::string detail;
};

struct PropertyReport {
  std::vector<PropertyResult> results;
  bool passed() const;
  const PropertyResult * find(const std::string & name) const;
};

struct PropertyOptions {
  int k{1};
  int samples{8};
  int gauge_trials{200};
  int coercivity_samples{64};
  std::uint64_t seed{1};
};

/**
 * Gauge invariance, homogeneity (pure powers), midpoint convexity of g_k,
 * the bounds α|A|^p ≤ g_k(A) ≤ energy of the competitor, and a strictly
 * positive minimum of g_k on the unit sphere.
 */
PropertyReport property_suite(const StructureSpec & spec, const Integrand & f, const PropertyOptions & popt = {},
                              const SolverOptions & options = {});

//! global rigid motion added to every block (rigid) or its translation added to the corrector (elastic)
DofVector add_global_rigid_motion(const CellProblem & problem, const DofVector & u, const RigidMotion & g);

}  // namespace homlab

#endif  // HOMLAB_CELL_SOLVER_HH_
