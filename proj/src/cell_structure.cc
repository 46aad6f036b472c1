#include "homlab/cell_structure.hh"

#include <cmath>
#include <stdexcept>
#include <string>

namespace homlab {

int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

LatticeIndex periodic_neighbor(const LatticeIndex & index, int axis, int step, int k) {
  LatticeIndex out = index;
  out[static_cast<std::size_t>(axis)] = ((index[static_cast<std::size_t>(axis)] + step) % k + k) % k;
  return out;
}

/* ---------------------------------------------------------------------- */
int RigidSpringCell::block_id(const LatticeIndex & index) const {
  int id = 0;
  for (int d = n - 1; d >= 0; --d) {
    const int i = index[static_cast<std::size_t>(d)];
    if (i < 0 || i >= k) throw std::out_of_range("RigidSpringCell: block index out of range");
    id = id * k + i;
  }
  return id;
}

double RigidSpringCell::measure_per_unit_cell() const {
  double total = 0.0;
  for (const auto & f : faces) total += f.measure_weight;
  return total / std::pow(static_cast<double>(k), n);
}

RigidSpringCell RigidSpringCell::translated(const LatticeIndex & shift) const {
  RigidSpringCell out = *this;
  Vector s(n);
  for (int d = 0; d < n; ++d) s(d) = shift[static_cast<std::size_t>(d)];
  for (auto & b : out.blocks) {
    b.origin += s;
    b.centroid += s;
  }
  for (auto & f : out.faces) {
    f.origin += s;
    f.centroid += s;
  }
  return out;
}

RigidSpringCell build_rigid_spring_cell(int n, int k) {
  require_supported_dim(n);
  if (k < 1) throw std::invalid_argument("build_rigid_spring_cell: period k must be >= 1");

  RigidSpringCell cell;
  cell.n = n;
  cell.k = k;
  cell.share = 1.0 / n;

  int count = 1;
  for (int d = 0; d < n; ++d) count *= k;
  cell.blocks.reserve(static_cast<std::size_t>(count));
  for (int id = 0; id < count; ++id) {
    RigidBlock b;
    int rest = id;
    b.origin = Vector::Zero(n);
    for (int d = 0; d < n; ++d) {
      b.index[static_cast<std::size_t>(d)] = rest % k;
      b.origin(d) = rest % k;
      rest /= k;
    }
    b.centroid = b.origin + Vector::Constant(n, 0.5);
    cell.blocks.push_back(std::move(b));
  }

  // one face per block and axis: the face on the block's +e_axis side
  for (int id = 0; id < count; ++id) {
    const auto & b = cell.blocks[static_cast<std::size_t>(id)];
    for (int axis = 0; axis < n; ++axis) {
      SpringFace f;
      f.minus = id;
      f.plus = cell.block_id(periodic_neighbor(b.index, axis, +1, k));
      f.axis = axis;
      f.wrapped = b.index[static_cast<std::size_t>(axis)] == k - 1;
      f.origin = b.origin;
      f.origin(axis) += 1.0;
      f.centroid = b.centroid;
      f.centroid(axis) += 0.5;
      f.measure_weight = cell.share;
      cell.faces.push_back(std::move(f));
    }
  }
  return cell;
}

/* ---------------------------------------------------------------------- */
double ElasticSpringCell::measure_per_unit_cell() const {
  double surface = 0.0;
  for (const auto & p : pairs) surface += p.length_weight;
  const double kk = static_cast<double>(k) * k;
  return (volume_share * kk + surface_share * surface) / kk;
}

ElasticSpringCell build_elastic_spring_cell(int k, int m, bool with_interface) {
  if (k < 1) throw std::invalid_argument("build_elastic_spring_cell: period k must be >= 1");
  if (m < 1) throw std::invalid_argument("build_elastic_spring_cell: grid m must be >= 1");

  ElasticSpringCell cell;
  cell.k = k;
  cell.m = m;
  cell.with_interface = with_interface;
  cell.h = 1.0 / m;
  const double h = cell.h;

  if (!with_interface) {
    // conforming k-periodic mesh; only Lebesgue measure remains
    cell.volume_share = 1.0;
    cell.surface_share = 0.0;
    const int N = k * m;
    auto id = [N](int i, int j) { return ((j % N + N) % N) * N + ((i % N + N) % N); };
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i) cell.nodes.emplace_back(i * h, j * h);
    }
    for (int j = 0; j < N; ++j) {
      for (int i = 0; i < N; ++i) {
        cell.elements.push_back({{id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)},
                                 Eigen::Vector2d(i * h, j * h)});
      }
    }
    return cell;
  }

  cell.volume_share = 1.0 / 3.0;
  cell.surface_share = 1.0 / 3.0;
  const int per_cube = (m + 1) * (m + 1);
  auto node = [&](int cx, int cy, int a, int b) { return (cy * k + cx) * per_cube + b * (m + 1) + a; };

  for (int cy = 0; cy < k; ++cy) {
    for (int cx = 0; cx < k; ++cx) {
      for (int b = 0; b <= m; ++b) {
        for (int a = 0; a <= m; ++a) cell.nodes.emplace_back(cx + a * h, cy + b * h);
      }
    }
  }
  for (int cy = 0; cy < k; ++cy) {
    for (int cx = 0; cx < k; ++cx) {
      for (int b = 0; b < m; ++b) {
        for (int a = 0; a < m; ++a) {
          cell.elements.push_back({{node(cx, cy, a, b), node(cx, cy, a + 1, b), node(cx, cy, a + 1, b + 1),
                                    node(cx, cy, a, b + 1)},
                                   Eigen::Vector2d(cx + a * h, cy + b * h)});
        }
      }
    }
  }
  for (int cy = 0; cy < k; ++cy) {
    for (int cx = 0; cx < k; ++cx) {
      const int px = (cx + 1) % k;
      const int py = (cy + 1) % k;
      for (int t = 0; t <= m; ++t) {
        const double w = (t == 0 || t == m) ? 0.5 * h : h;
        cell.pairs.push_back({node(cx, cy, m, t), node(px, cy, 0, t), 0, cx == k - 1, w});
        cell.pairs.push_back({node(cx, cy, t, m), node(cx, py, t, 0), 1, cy == k - 1, w});
      }
    }
  }
  return cell;
}

/* ---------------------------------------------------------------------- */
DofVector competitor_field(const RigidSpringCell & cell, const SymMatrix & A) {
  if (A.dim() != cell.n) throw std::invalid_argument("competitor_field: dimension mismatch");
  const int np = RigidMotion::parameter_count(cell.n);
  DofVector u{Vector::Zero(np * static_cast<Eigen::Index>(cell.blocks.size())), 0};
  for (std::size_t b = 0; b < cell.blocks.size(); ++b) {
    u.values.segment(static_cast<Eigen::Index>(b) * np + skew_size(cell.n), cell.n) =
        A.matrix() * cell.blocks[b].centroid;
  }
  // a constant shift keeps block 0 at the gauge
  const Vector c0 = u.values.segment(skew_size(cell.n), cell.n);
  for (std::size_t b = 0; b < cell.blocks.size(); ++b) {
    u.values.segment(static_cast<Eigen::Index>(b) * np + skew_size(cell.n), cell.n) -= c0;
  }
  return u;
}

DofVector competitor_field(const ElasticSpringCell & cell, const SymMatrix & A) {
  if (A.dim() != ElasticSpringCell::n) throw std::invalid_argument("competitor_field: dimension mismatch");
  return {Vector::Zero(cell.dof_count()), 0};
}

/* ---------------------------------------------------------------------- */
CylinderLattice build_cylinder_lattice(const Rectangle & omega, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw std::invalid_argument("build_cylinder_lattice: epsilon must be positive");
  }
  if (!(omega.x1 > omega.x0) || !(omega.y1 > omega.y0)) {
    throw std::invalid_argument("build_cylinder_lattice: omega must be a nonempty rectangle");
  }
  CylinderLattice lat;
  lat.omega = omega;
  lat.epsilon = epsilon;
  lat.radius = epsilon / 4.0;
  const int i0 = static_cast<int>(std::floor(omega.x0 / epsilon)) - 1;
  const int i1 = static_cast<int>(std::ceil(omega.x1 / epsilon)) + 1;
  const int j0 = static_cast<int>(std::floor(omega.y0 / epsilon)) - 1;
  const int j1 = static_cast<int>(std::ceil(omega.y1 / epsilon)) + 1;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Eigen::Vector2d c(epsilon * i + epsilon / 2.0, epsilon * j + epsilon / 2.0);
      const double r = lat.radius;
      if (c.x() - r > omega.x0 && c.x() + r < omega.x1 && c.y() - r > omega.y0 && c.y() + r < omega.y1) {
        lat.cylinders.push_back({{i, j}, c});
      }
    }
  }
  return lat;
}

/* ---------------------------------------------------------------------- */
std::array<int, 2> TileGrid::tile_of_cylinder(const std::array<int, 2> & i) const {
  return {floor_div(i[0], h), floor_div(i[1], h)};
}

std::array<int, 2> TileGrid::tile_of_point(const Eigen::Vector2d & x) const {
  return {static_cast<int>(std::floor(x.x() / eta)), static_cast<int>(std::floor(x.y() / eta))};
}

Rectangle TileGrid::tile_box(const std::array<int, 2> & t) const {
  return {eta * t[0], eta * (t[0] + 1), eta * t[1], eta * (t[1] + 1)};
}

std::vector<std::array<int, 2>> tiles_covering(const Rectangle & omega, double eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("tiles_covering: eta must be positive");
  std::vector<std::array<int, 2>> out;
  const int i0 = static_cast<int>(std::floor(omega.x0 / eta));
  const int i1 = static_cast<int>(std::ceil(omega.x1 / eta));
  const int j0 = static_cast<int>(std::floor(omega.y0 / eta));
  const int j1 = static_cast<int>(std::ceil(omega.y1 / eta));
  for (int j = j0; j < j1; ++j) {
    for (int i = i0; i < i1; ++i) {
      if (eta * i < omega.x1 && eta * (i + 1) > omega.x0 && eta * j < omega.y1 && eta * (j + 1) > omega.y0) {
        out.push_back({i, j});
      }
    }
  }
  return out;
}

TileGrid build_tile_grid(const Rectangle & omega, double eta, double epsilon) {
  if (!(eta > 0.0) || !(epsilon > 0.0)) throw std::invalid_argument("build_tile_grid: eta, epsilon must be positive");
  const double ratio = eta / epsilon;
  const long h = std::lround(ratio);
  if (h < 1 || std::abs(static_cast<double>(h) * epsilon - eta) > 1e-9 * eta) {
    throw std::invalid_argument("tile size eta = " + std::to_string(eta) +
                                " is not an integer multiple of epsilon = " + std::to_string(epsilon));
  }
  TileGrid g;
  g.omega = omega;
  g.eta = eta;
  g.epsilon = epsilon;
  g.h = static_cast<int>(h);
  g.tiles = tiles_covering(omega, eta);
  return g;
}

}  // namespace homlab
