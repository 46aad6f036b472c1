#include "homlab/cell_solver.hh"
#include "homlab/quadrature.hh"

#include <cmath>
#include <stdexcept>

namespace homlab {

std::string to_string(Family f) {
  switch (f) {
    case Family::rigid_spring: return "rigid_spring";
    case Family::elastic_spring: return "elastic_spring";
  }
  return "unknown";
}

Family family_from_string(const std::string & s) {
  if (s == "rigid_spring") return Family::rigid_spring;
  if (s == "elastic_spring") return Family::elastic_spring;
  throw std::invalid_argument("unknown structure family '" + s + "'");
}

std::shared_ptr<const CellStructure> StructureSpec::build(int k) const {
  if (family == Family::rigid_spring) return std::make_shared<const CellStructure>(build_rigid_spring_cell(n, k));
  return std::make_shared<const CellStructure>(build_elastic_spring_cell(k, m, interface));
}

/* ---------------------------------------------------------------------- */
CellProblem::CellProblem(std::shared_ptr<const CellStructure> s, Integrand f, SymMatrix A, int fq)
    : structure(std::move(s)), integrand(std::move(f)), strain(std::move(A)), frame_rotation(strain.dim()),
      face_quadrature(fq) {
  if (!structure) throw std::invalid_argument("CellProblem: null structure");
  if (strain.dim() != dim()) throw std::invalid_argument("CellProblem: strain dimension does not match structure");
  if (integrand.dimension() && *integrand.dimension() != dim()) {
    throw std::invalid_argument("CellProblem: integrand dimension does not match structure");
  }
}

int CellProblem::dim() const {
  return std::visit([](const auto & c) { return c.n; }, *structure);
}

int CellProblem::period() const {
  return std::visit([](const auto & c) { return c.k; }, *structure);
}

int CellProblem::dof_count() const {
  if (const auto * rs = std::get_if<RigidSpringCell>(structure.get())) {
    return RigidMotion::parameter_count(rs->n) * static_cast<int>(rs->blocks.size());
  }
  return std::get<ElasticSpringCell>(*structure).dof_count();
}

DofVector CellProblem::zero_dofs() const { return {Vector::Zero(dof_count()), 0}; }

int CellProblem::face_points() const {
  if (face_quadrature > 0) return face_quadrature;
  return integrand.is_quadratic() ? 2 : 4;
}

std::vector<int> CellProblem::pinned_dofs() const {
  std::vector<int> out;
  if (const auto * rs = std::get_if<RigidSpringCell>(structure.get())) {
    for (int d = 0; d < rs->n; ++d) out.push_back(skew_size(rs->n) + d);
  } else {
    out = {0, 1};
  }
  return out;
}

/* ---------------------------------------------------------------------- */
namespace {

EnergyEvaluation assemble_rigid(const CellProblem & pb, const RigidSpringCell & cell, const Vector & u,
                                double huber) {
  const int n = cell.n;
  const int np = RigidMotion::parameter_count(n);
  const Matrix datum = pb.strain.matrix() + pb.frame_rotation.matrix();
  const auto rule = gauss_legendre_unit(pb.face_points());
  const int q = static_cast<int>(rule.nodes.size());

  std::vector<RigidMotion> motions;
  motions.reserve(cell.blocks.size());
  for (std::size_t b = 0; b < cell.blocks.size(); ++b) {
    const Vector p = u.segment(static_cast<Eigen::Index>(b) * np, np);
    motions.push_back(RigidMotion::from_parameters(n, {p.data(), static_cast<std::size_t>(np)}));
  }

  EnergyEvaluation out{0.0, Vector::Zero(u.size())};
  SymMatrix G(n);
  for (const auto & face : cell.faces) {
    const Vector nu = Vector::Unit(n, face.axis);
    int t1 = -1;
    int t2 = -1;
    for (int d = 0; d < n; ++d) {
      if (d == face.axis) continue;
      (t1 < 0 ? t1 : t2) = d;
    }
    const int q2 = n == 3 ? q : 1;
    Vector offset = Vector::Zero(n);
    if (face.wrapped) offset = static_cast<double>(cell.k) * Vector::Unit(n, face.axis);

    for (int a = 0; a < q; ++a) {
      for (int b = 0; b < q2; ++b) {
        Vector x = face.origin;
        x(t1) += rule.nodes[static_cast<std::size_t>(a)];
        double wq = rule.weights[static_cast<std::size_t>(a)];
        if (n == 3) {
          x(t2) += rule.nodes[static_cast<std::size_t>(b)];
          wq *= rule.weights[static_cast<std::size_t>(b)];
        }
        const Vector x_plus = x - offset;
        Vector jump = motions[static_cast<std::size_t>(face.plus)](x_plus) -
                      motions[static_cast<std::size_t>(face.minus)](x);
        if (face.wrapped) jump += datum * offset;

        const SymMatrix X = (1.0 / cell.share) * sym_product(jump, nu);
        const double val = pb.integrand.value_and_gradient(Region::interface, X, G, huber);
        out.energy += wq * face.measure_weight * val;

        const Vector gj = (wq * face.measure_weight / cell.share) * (G.matrix() * nu);
        out.gradient.segment(face.plus * np, np) += rigid_parameter_jacobian(n, x_plus).transpose() * gj;
        out.gradient.segment(face.minus * np, np) -= rigid_parameter_jacobian(n, x).transpose() * gj;
      }
    }
  }
  const double volume = std::pow(static_cast<double>(cell.k), n);
  out.energy /= volume;
  out.gradient /= volume;
  return out;
}

// bilinear shape-function gradients on an h x h square at local (s, t) ∈ [0,1]²
std::array<Eigen::Vector2d, 4> q1_gradients(double s, double t, double h) {
  return {Eigen::Vector2d(-(1.0 - t), -(1.0 - s)) / h, Eigen::Vector2d(1.0 - t, -s) / h,
          Eigen::Vector2d(t, s) / h, Eigen::Vector2d(-t, 1.0 - s) / h};
}

EnergyEvaluation assemble_elastic(const CellProblem & pb, const ElasticSpringCell & cell, const Vector & v,
                                  double huber) {
  constexpr int n = ElasticSpringCell::n;
  EnergyEvaluation out{0.0, Vector::Zero(v.size())};
  const auto rule = gauss_legendre_unit(2);
  const double area = cell.h * cell.h;
  SymMatrix G(n);

  if (cell.volume_share > 0.0) {
    for (const auto & el : cell.elements) {
      for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t b = 0; b < 2; ++b) {
          const auto grads = q1_gradients(rule.nodes[a], rule.nodes[b], cell.h);
          Matrix du = Matrix::Zero(n, n);
          for (std::size_t c = 0; c < 4; ++c) {
            const Eigen::Vector2d vc = v.segment<2>(2 * el.nodes[c]);
            du += vc * grads[c].transpose();
          }
          const SymMatrix strain = pb.strain + SymMatrix::symmetric_part(du);
          const SymMatrix X = (1.0 / cell.volume_share) * strain;
          const double w = rule.weights[a] * rule.weights[b] * area;
          out.energy += w * cell.volume_share * pb.integrand.value_and_gradient(Region::volume, X, G, huber);
          for (std::size_t c = 0; c < 4; ++c) {
            out.gradient.segment<2>(2 * el.nodes[c]) += w * (G.matrix() * grads[c]);
          }
        }
      }
    }
  }

  if (cell.surface_share > 0.0) {
    for (const auto & pr : cell.pairs) {
      const Vector jump = v.segment<2>(2 * pr.plus) - v.segment<2>(2 * pr.minus);
      const Vector nu = Vector::Unit(n, pr.axis);
      const SymMatrix X = (1.0 / cell.surface_share) * sym_product(jump, nu);
      out.energy +=
          pr.length_weight * cell.surface_share * pb.integrand.value_and_gradient(Region::interface, X, G, huber);
      const Vector gj = pr.length_weight * (G.matrix() * nu);
      out.gradient.segment<2>(2 * pr.plus) += gj;
      out.gradient.segment<2>(2 * pr.minus) -= gj;
    }
  }

  const double volume = static_cast<double>(cell.k) * cell.k;
  out.energy /= volume;
  out.gradient /= volume;
  return out;
}

}  // namespace

EnergyEvaluation assemble_energy(const CellProblem & problem, const DofVector & u, double huber_delta) {
  if (u.values.size() != problem.dof_count()) {
    throw std::invalid_argument("assemble_energy: DOF vector has " + std::to_string(u.values.size()) +
                                " entries, structure expects " + std::to_string(problem.dof_count()));
  }
  if (const auto * rs = std::get_if<RigidSpringCell>(problem.structure.get())) {
    return assemble_rigid(problem, *rs, u.values, huber_delta);
  }
  return assemble_elastic(problem, std::get<ElasticSpringCell>(*problem.structure), u.values, huber_delta);
}

DofVector add_global_rigid_motion(const CellProblem & problem, const DofVector & u, const RigidMotion & g) {
  if (g.dim() != problem.dim()) throw std::invalid_argument("add_global_rigid_motion: dimension mismatch");
  DofVector out = u;
  if (const auto * rs = std::get_if<RigidSpringCell>(problem.structure.get())) {
    const int np = RigidMotion::parameter_count(rs->n);
    const Vector gp = g.parameters();
    for (std::size_t b = 0; b < rs->blocks.size(); ++b) out.values.segment(static_cast<Eigen::Index>(b) * np, np) += gp;
    return out;
  }
  // the rotation of g moves into the affine datum, only its translation shifts v
  for (Eigen::Index i = 0; i < out.values.size(); i += 2) out.values.segment<2>(i) += g.translation;
  return out;
}

}  // namespace homlab
