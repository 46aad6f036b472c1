/**
 * @file   tensor.hh
 *
 * @brief  Small dense tensor calculus for strain-dependent energies:
 *         symmetric and skew matrices, rigid motions and the symmetric
 *         product of two vectors. Dimensions are restricted to 2 and 3.
 */
#ifndef HOMLAB_TENSOR_HH_
#define HOMLAB_TENSOR_HH_

#include <Eigen/Dense>

#include <span>

namespace homlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

//! throws std::invalid_argument unless n is 2 or 3
void require_supported_dim(int n);

/**
 * Symmetric n x n matrix. Every write goes through `set`, which updates
 * both (i,j) and (j,i), so the stored matrix is symmetric bit for bit.
 */
class SymMatrix {
 public:
  explicit SymMatrix(int n = 2);

  //! throws std::invalid_argument if `m` is not square or not exactly symmetric
  static SymMatrix from_matrix(const Matrix & m);
  //! ½(M + Mᵀ)
  static SymMatrix symmetric_part(const Matrix & m);
  static SymMatrix identity(int n);
  //! orthonormal (Mandel) coordinates: diagonal first, then √2·off-diagonal
  static SymMatrix from_mandel(int n, const Vector & a);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  void set(int i, int j, double v);
  const Matrix & matrix() const { return m_; }

  double norm_sq() const { return m_.squaredNorm(); }
  double norm() const { return m_.norm(); }
  //! Frobenius inner product A:B
  double dot(const SymMatrix & other) const;
  Vector mandel() const;

  SymMatrix & operator+=(const SymMatrix & o);
  SymMatrix & operator-=(const SymMatrix & o);
  SymMatrix & operator*=(double s);

  friend SymMatrix operator+(SymMatrix a, const SymMatrix & b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix & b) { return a -= b; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend bool operator==(const SymMatrix & a, const SymMatrix & b) {
    return a.dim() == b.dim() && a.m_ == b.m_;
  }

 private:
  Matrix m_;
};

//! number of independent entries of a symmetric n x n matrix
constexpr int sym_size(int n) { return n * (n + 1) / 2; }
//! number of independent entries of a skew n x n matrix
constexpr int skew_size(int n) { return n * (n - 1) / 2; }

/**
 * Skew-symmetric n x n matrix, parametrized by its independent entries:
 * in 2D the single angle-rate r with R = [[0,-r],[r,0]], in 3D the axial
 * vector a with R x = a ∧ x.
 */
class SkewMatrix {
 public:
  explicit SkewMatrix(int n = 2);

  static SkewMatrix from_matrix(const Matrix & m);
  static SkewMatrix skew_part(const Matrix & m);
  static SkewMatrix from_parameters(int n, std::span<const double> params);
  static SkewMatrix from_axial(const Eigen::Vector3d & a);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  const Matrix & matrix() const { return m_; }

  //! 2D: {r}; 3D: axial vector {a1, a2, a3}
  Vector parameters() const;
  //! only for n == 3
  Eigen::Vector3d axial() const;

  SkewMatrix & operator+=(const SkewMatrix & o);
  SkewMatrix & operator-=(const SkewMatrix & o);
  SkewMatrix & operator*=(double s);

  friend SkewMatrix operator+(SkewMatrix a, const SkewMatrix & b) { return a += b; }
  friend SkewMatrix operator-(SkewMatrix a, const SkewMatrix & b) { return a -= b; }
  friend SkewMatrix operator*(double s, SkewMatrix a) { return a *= s; }
  friend bool operator==(const SkewMatrix & a, const SkewMatrix & b) {
    return a.dim() == b.dim() && a.m_ == b.m_;
  }

 private:
  Matrix m_;
};

/**
 * Infinitesimal rigid displacement x ↦ R x + c with R skew. In 3D this is
 * the same as a ∧ x + c with a the axial vector of R.
 */
struct RigidMotion {
  SkewMatrix rotation;
  Vector translation;

  RigidMotion() : RigidMotion(2) {}
  explicit RigidMotion(int n);
  RigidMotion(SkewMatrix r, Vector c);

  static RigidMotion from_axial(const Eigen::Vector3d & a, const Eigen::Vector3d & b);
  //! parameters laid out as [skew parameters..., translation...]
  static RigidMotion from_parameters(int n, std::span<const double> params);

  int dim() const { return rotation.dim(); }
  static int parameter_count(int n) { return skew_size(n) + n; }
  Vector parameters() const;

  Vector operator()(const Vector & x) const;

  friend RigidMotion operator+(const RigidMotion & a, const RigidMotion & b);
  friend RigidMotion operator-(const RigidMotion & a, const RigidMotion & b);
  friend RigidMotion operator*(double s, const RigidMotion & a);
};

//! R x + c
Vector rigid_eval(const RigidMotion & m, const Vector & x);

/**
 * Jacobian of x ↦ m(x) with respect to m's parameters at the point x,
 * an n x parameter_count(n) matrix.
 */
Matrix rigid_parameter_jacobian(int n, const Vector & x);

//! a ⊙ b = ½(a⊗b + b⊗a)
SymMatrix sym_product(const Vector & a, const Vector & b);

//! |a ⊙ b|² = ½(|a|²|b|² + (a·b)²)
double sym_product_norm_sq(const Vector & a, const Vector & b);

//! cross_matrix(a) * x == a.cross(x)
Eigen::Matrix3d cross_matrix(const Eigen::Vector3d & a);

}  // namespace homlab

#endif  // HOMLAB_TENSOR_HH_
