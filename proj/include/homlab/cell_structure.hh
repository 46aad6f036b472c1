/**
 * @file   cell_structure.hh
 *
 * @brief  Discrete periodic structures carried by singular or mixed
 *         measures: rigid blocks joined by springs on the cube faces,
 *         elastic cubes joined by springs, and a lattice of vertical
 *         cylinders inside a cylindrical domain ω × (0,1).
 */
#ifndef HOMLAB_CELL_STRUCTURE_HH_
#define HOMLAB_CELL_STRUCTURE_HH_

#include "homlab/tensor.hh"

#include <array>
#include <optional>
#include <vector>

namespace homlab {

using LatticeIndex = std::array<int, 3>;

//! neighbour of `index` one step along axis `axis` (step = ±1) in a k-periodic cell
LatticeIndex periodic_neighbor(const LatticeIndex & index, int axis, int step, int k);

/* ---------------------------------------------------------------------- */
struct RigidBlock {
  LatticeIndex index{};
  Vector origin;    //!< lower corner of the unit cube
  Vector centroid;
};

/**
 * One spring face, shared by `minus` and `plus = minus + e_axis`. Faces that
 * cross the top of the period cell are `wrapped`: the plus block is then
 * the periodic image translated by k·e_axis.
 */
struct SpringFace {
  int minus{};
  int plus{};
  int axis{};
  bool wrapped{};
  Vector origin;    //!< lower corner of the face, in the minus block's frame
  Vector centroid;
  //! μ-mass of the face: share · H^{n-1}(face)
  double measure_weight{};
};

struct RigidSpringCell {
  int n{};
  int k{};
  //! μ = share · H^{n-1}⌞E with share = 1/n so that μ([0,1)^n) = 1
  double share{};
  std::vector<RigidBlock> blocks;
  std::vector<SpringFace> faces;

  int block_id(const LatticeIndex & index) const;
  //! μ([0,k)^n) / k^n
  double measure_per_unit_cell() const;
  //! same cell with every block shifted by the integer vector `shift`
  RigidSpringCell translated(const LatticeIndex & shift) const;
};

RigidSpringCell build_rigid_spring_cell(int n, int k);

/* ---------------------------------------------------------------------- */
/**
 * 2D cell of k x k elastic unit squares meshed with m x m bilinear
 * quadrilaterals. With `with_interface` every square carries its own nodes,
 * so each node on a square boundary appears once per adjacent square and
 * the pair of traces defines a displacement jump. Without it the mesh is
 * conforming and k-periodic and the measure reduces to Lebesgue measure.
 */
struct ElasticSpringCell {
  struct Element {
    std::array<int, 4> nodes{};  //!< counter-clockwise from the lower-left corner
    Eigen::Vector2d origin;
  };
  struct NodePair {
    int minus{};
    int plus{};
    int axis{};
    bool wrapped{};
    double length_weight{};  //!< trapezoid weight along the face
  };

  static constexpr int n = 2;
  int k{};
  int m{};
  bool with_interface{};
  double volume_share{};
  double surface_share{};
  double h{};  //!< element edge length 1/m
  std::vector<Eigen::Vector2d> nodes;
  std::vector<Element> elements;
  std::vector<NodePair> pairs;

  int dof_count() const { return 2 * static_cast<int>(nodes.size()); }
  double measure_per_unit_cell() const;
};

ElasticSpringCell build_elastic_spring_cell(int k, int m, bool with_interface = true);

/* ---------------------------------------------------------------------- */
//! DOFs of a cell problem; the pinned block's translation is held at zero
struct DofVector {
  Vector values;
  std::optional<int> pinned_block;
};

//! piecewise-constant field u = A·(block centroid), zero rotations
DofVector competitor_field(const RigidSpringCell & cell, const SymMatrix & A);
//! the affine field u = A x, i.e. a zero periodic corrector
DofVector competitor_field(const ElasticSpringCell & cell, const SymMatrix & A);

/* ---------------------------------------------------------------------- */
struct Rectangle {
  double x0{}, x1{}, y0{}, y1{};
  double area() const { return (x1 - x0) * (y1 - y0); }
  bool contains(const Eigen::Vector2d & p) const { return p.x() > x0 && p.x() < x1 && p.y() > y0 && p.y() < y1; }
};

struct Cylinder {
  std::array<int, 2> index{};
  Eigen::Vector2d center;
};

/**
 * Vertical cylinders of radius ε/4 centred at ε(i + ½) whose closed
 * cross-section lies inside the open rectangle ω; height interval (0,1).
 */
struct CylinderLattice {
  Rectangle omega;
  double epsilon{};
  double radius{};
  std::vector<Cylinder> cylinders;
  bool empty() const { return cylinders.empty(); }
};

CylinderLattice build_cylinder_lattice(const Rectangle & omega, double epsilon);

/**
 * Square tiles ηk + (0,η)² covering ω, with η = hε for an integer h so that
 * every lattice cell (and hence every cylinder) lies in exactly one tile.
 */
struct TileGrid {
  Rectangle omega;
  double eta{};
  double epsilon{};
  int h{};
  std::vector<std::array<int, 2>> tiles;

  std::array<int, 2> tile_of_cylinder(const std::array<int, 2> & cylinder_index) const;
  std::array<int, 2> tile_of_point(const Eigen::Vector2d & x) const;
  Rectangle tile_box(const std::array<int, 2> & tile) const;
};

//! tiles of size η meeting ω
std::vector<std::array<int, 2>> tiles_covering(const Rectangle & omega, double eta);

//! throws std::invalid_argument unless η/ε is a positive integer (to 1e-9)
TileGrid build_tile_grid(const Rectangle & omega, double eta, double epsilon);

int floor_div(int a, int b);

}  // namespace homlab

#endif  // HOMLAB_CELL_STRUCTURE_HH_
