#include "homlab/tensor.hh"

#include <cmath>
#include <stdexcept>
#include <string>

namespace homlab {

void require_supported_dim(int n) {
  if (n != 2 && n != 3) {
    throw std::invalid_argument("dimension must be 2 or 3, got " + std::to_string(n));
  }
}

namespace {

void require_same_dim(int a, int b, const char * what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

/* ---------------------------------------------------------------------- */
SymMatrix::SymMatrix(int n) : m_(Matrix::Zero(n, n)) { require_supported_dim(n); }

SymMatrix SymMatrix::from_matrix(const Matrix & m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrix: matrix not square");
  SymMatrix s(static_cast<int>(m.rows()));
  for (int i = 0; i < s.dim(); ++i) {
    for (int j = i; j < s.dim(); ++j) {
      if (m(i, j) != m(j, i)) throw std::invalid_argument("SymMatrix: matrix not symmetric");
      s.set(i, j, m(i, j));
    }
  }
  return s;
}

SymMatrix SymMatrix::symmetric_part(const Matrix & m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrix: matrix not square");
  SymMatrix s(static_cast<int>(m.rows()));
  for (int i = 0; i < s.dim(); ++i) {
    for (int j = i; j < s.dim(); ++j) s.set(i, j, 0.5 * (m(i, j) + m(j, i)));
  }
  return s;
}

SymMatrix SymMatrix::identity(int n) {
  SymMatrix s(n);
  for (int i = 0; i < n; ++i) s.set(i, i, 1.0);
  return s;
}

namespace {

// off-diagonal ordering of the Mandel vector
constexpr int kOff2[1][2] = {{0, 1}};
constexpr int kOff3[3][2] = {{1, 2}, {0, 2}, {0, 1}};

template <class F>
void for_each_offdiag(int n, F && f) {
  if (n == 2) {
    f(2, kOff2[0][0], kOff2[0][1]);
  } else {
    for (int k = 0; k < 3; ++k) f(3 + k, kOff3[k][0], kOff3[k][1]);
  }
}

}  // namespace

SymMatrix SymMatrix::from_mandel(int n, const Vector & a) {
  require_supported_dim(n);
  if (a.size() != sym_size(n)) throw std::invalid_argument("SymMatrix: bad Mandel vector size");
  SymMatrix s(n);
  for (int i = 0; i < n; ++i) s.set(i, i, a(i));
  for_each_offdiag(n, [&](int idx, int i, int j) { s.set(i, j, a(idx) / std::sqrt(2.0)); });
  return s;
}

void SymMatrix::set(int i, int j, double v) {
  m_(i, j) = v;
  m_(j, i) = v;
}

double SymMatrix::dot(const SymMatrix & other) const {
  require_same_dim(dim(), other.dim(), "SymMatrix::dot");
  return (m_.array() * other.m_.array()).sum();
}

Vector SymMatrix::mandel() const {
  const int n = dim();
  Vector a(sym_size(n));
  for (int i = 0; i < n; ++i) a(i) = m_(i, i);
  for_each_offdiag(n, [&](int idx, int i, int j) { a(idx) = std::sqrt(2.0) * m_(i, j); });
  return a;
}

SymMatrix & SymMatrix::operator+=(const SymMatrix & o) {
  require_same_dim(dim(), o.dim(), "SymMatrix::+");
  m_ += o.m_;
  return *this;
}

SymMatrix & SymMatrix::operator-=(const SymMatrix & o) {
  require_same_dim(dim(), o.dim(), "SymMatrix::-");
  m_ -= o.m_;
  return *this;
}

SymMatrix & SymMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

/* ---------------------------------------------------------------------- */
SkewMatrix::SkewMatrix(int n) : m_(Matrix::Zero(n, n)) { require_supported_dim(n); }

SkewMatrix SkewMatrix::from_matrix(const Matrix & m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SkewMatrix: matrix not square");
  SkewMatrix s(static_cast<int>(m.rows()));
  for (int i = 0; i < s.dim(); ++i) {
    if (m(i, i) != 0.0) throw std::invalid_argument("SkewMatrix: nonzero diagonal");
    for (int j = i + 1; j < s.dim(); ++j) {
      if (m(i, j) != -m(j, i)) throw std::invalid_argument("SkewMatrix: matrix not skew");
      s.m_(i, j) = m(i, j);
      s.m_(j, i) = -m(i, j);
    }
  }
  return s;
}

SkewMatrix SkewMatrix::skew_part(const Matrix & m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("SkewMatrix: matrix not square");
  SkewMatrix s(static_cast<int>(m.rows()));
  for (int i = 0; i < s.dim(); ++i) {
    for (int j = i + 1; j < s.dim(); ++j) {
      const double v = 0.5 * (m(i, j) - m(j, i));
      s.m_(i, j) = v;
      s.m_(j, i) = -v;
    }
  }
  return s;
}

SkewMatrix SkewMatrix::from_parameters(int n, std::span<const double> params) {
  require_supported_dim(n);
  if (static_cast<int>(params.size()) != skew_size(n)) {
    throw std::invalid_argument("SkewMatrix: wrong parameter count");
  }
  if (n == 3) return from_axial(Eigen::Vector3d(params[0], params[1], params[2]));
  SkewMatrix s(2);
  s.m_(0, 1) = -params[0];
  s.m_(1, 0) = params[0];
  return s;
}

SkewMatrix SkewMatrix::from_axial(const Eigen::Vector3d & a) {
  SkewMatrix s(3);
  s.m_ = cross_matrix(a);
  return s;
}

Vector SkewMatrix::parameters() const {
  if (dim() == 3) return axial();
  Vector p(1);
  p(0) = m_(1, 0);
  return p;
}

Eigen::Vector3d SkewMatrix::axial() const {
  if (dim() != 3) throw std::invalid_argument("SkewMatrix::axial: only defined in 3D");
  return {m_(2, 1), m_(0, 2), m_(1, 0)};
}

SkewMatrix & SkewMatrix::operator+=(const SkewMatrix & o) {
  require_same_dim(dim(), o.dim(), "SkewMatrix::+");
  m_ += o.m_;
  return *this;
}

SkewMatrix & SkewMatrix::operator-=(const SkewMatrix & o) {
  require_same_dim(dim(), o.dim(), "SkewMatrix::-");
  m_ -= o.m_;
  return *this;
}

SkewMatrix & SkewMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

/* ---------------------------------------------------------------------- */
RigidMotion::RigidMotion(int n) : rotation(n), translation(Vector::Zero(n)) {}

RigidMotion::RigidMotion(SkewMatrix r, Vector c) : rotation(std::move(r)), translation(std::move(c)) {
  require_same_dim(rotation.dim(), static_cast<int>(translation.size()), "RigidMotion");
}

RigidMotion RigidMotion::from_axial(const Eigen::Vector3d & a, const Eigen::Vector3d & b) {
  return RigidMotion(SkewMatrix::from_axial(a), Vector(b));
}

RigidMotion RigidMotion::from_parameters(int n, std::span<const double> params) {
  require_supported_dim(n);
  if (static_cast<int>(params.size()) != parameter_count(n)) {
    throw std::invalid_argument("RigidMotion: wrong parameter count");
  }
  const auto nr = static_cast<std::size_t>(skew_size(n));
  Vector c(n);
  for (int i = 0; i < n; ++i) c(i) = params[nr + static_cast<std::size_t>(i)];
  return RigidMotion(SkewMatrix::from_parameters(n, params.first(nr)), c);
}

Vector RigidMotion::parameters() const {
  const int n = dim();
  Vector p(parameter_count(n));
  p.head(skew_size(n)) = rotation.parameters();
  p.tail(n) = translation;
  return p;
}

Vector RigidMotion::operator()(const Vector & x) const {
  require_same_dim(dim(), static_cast<int>(x.size()), "RigidMotion::eval");
  return rotation.matrix() * x + translation;
}

RigidMotion operator+(const RigidMotion & a, const RigidMotion & b) {
  return RigidMotion(a.rotation + b.rotation, a.translation + b.translation);
}

RigidMotion operator-(const RigidMotion & a, const RigidMotion & b) {
  return RigidMotion(a.rotation - b.rotation, a.translation - b.translation);
}

RigidMotion operator*(double s, const RigidMotion & a) {
  return RigidMotion(s * a.rotation, s * a.translation);
}

Vector rigid_eval(const RigidMotion & m, const Vector & x) { return m(x); }

Matrix rigid_parameter_jacobian(int n, const Vector & x) {
  require_supported_dim(n);
  require_same_dim(n, static_cast<int>(x.size()), "rigid_parameter_jacobian");
  Matrix J = Matrix::Zero(n, RigidMotion::parameter_count(n));
  if (n == 2) {
    J(0, 0) = -x(1);
    J(1, 0) = x(0);
  } else {
    // a ∧ x = -x ∧ a
    J.leftCols(3) = -cross_matrix(Eigen::Vector3d(x(0), x(1), x(2)));
  }
  J.rightCols(n).setIdentity();
  return J;
}

SymMatrix sym_product(const Vector & a, const Vector & b) {
  require_same_dim(static_cast<int>(a.size()), static_cast<int>(b.size()), "sym_product");
  const int n = static_cast<int>(a.size());
  SymMatrix s(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) s.set(i, j, 0.5 * (a(i) * b(j) + b(i) * a(j)));
  }
  return s;
}

double sym_product_norm_sq(const Vector & a, const Vector & b) {
  require_same_dim(static_cast<int>(a.size()), static_cast<int>(b.size()), "sym_product_norm_sq");
  const double ab = a.dot(b);
  return 0.5 * (a.squaredNorm() * b.squaredNorm() + ab * ab);
}

Eigen::Matrix3d cross_matrix(const Eigen::Vector3d & a) {
  Eigen::Matrix3d m;
  m << 0.0, -a(2), a(1),
       a(2), 0.0, -a(0),
       -a(1), a(0), 0.0;
  return m;
}

}  // namespace homlab
