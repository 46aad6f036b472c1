#include "homlab/tensor.hh"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace homlab;

namespace {

Vector random_vector(int n, std::mt19937_64 & rng) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = g(rng);
  return v;
}

Vector unit(int n, int i) {
  Vector e = Vector::Zero(n);
  e(i) = 1.0;
  return e;
}

}  // namespace

TEST_CASE("sym_product of basis vectors") {
  const SymMatrix a = sym_product(unit(2, 0), unit(2, 0));
  CHECK(a(0, 0) == 1.0);
  CHECK(a(0, 1) == 0.0);
  CHECK(a(1, 1) == 0.0);

  const SymMatrix b = sym_product(unit(2, 0), unit(2, 1));
  CHECK(b(0, 1) == 0.5);
  CHECK(b(1, 0) == 0.5);
  CHECK(b(0, 0) == 0.0);
  CHECK(b(1, 1) == 0.0);
}

TEST_CASE("sym_product is symmetric and bilinear") {
  std::mt19937_64 rng(5);
  for (int n : {2, 3}) {
    for (int t = 0; t < 100; ++t) {
      const Vector a = random_vector(n, rng);
      const Vector b = random_vector(n, rng);
      const Vector c = random_vector(n, rng);
      CHECK(sym_product(a, b) == sym_product(b, a));
      const SymMatrix lhs = sym_product(2.0 * a + c, b);
      const SymMatrix rhs = 2.0 * sym_product(a, b) + sym_product(c, b);
      CHECK((lhs - rhs).norm() <= 1e-14 * (1.0 + rhs.norm()));
    }
  }
}

TEST_CASE("sym_product_norm_sq against the Frobenius norm") {
  CHECK(sym_product_norm_sq(unit(3, 0), unit(3, 0)) == doctest::Approx(1.0));
  for (double theta = 0.0; theta < 6.3; theta += 0.37) {
    Vector nu(3);
    nu << std::cos(theta), std::sin(theta), 0.0;
    CHECK(sym_product_norm_sq(unit(3, 2), nu) == doctest::Approx(0.5).epsilon(1e-15));
  }
  std::mt19937_64 rng(9);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 2;
    const Vector a = random_vector(n, rng);
    const Vector b = random_vector(n, rng);
    const Matrix outer = 0.5 * (a * b.transpose() + b * a.transpose());
    const double direct = outer.squaredNorm();
    worst = std::max(worst, std::abs(sym_product_norm_sq(a, b) - direct) / std::max(1.0, direct));
  }
  CHECK(worst <= 1e-13);
}

TEST_CASE("SymMatrix construction and Mandel coordinates") {
  Matrix m(2, 2);
  m << 1.0, 2.0, 2.5, 3.0;
  CHECK_THROWS_AS(SymMatrix::from_matrix(m), std::invalid_argument);
  const SymMatrix s = SymMatrix::symmetric_part(m);
  CHECK(s(0, 1) == 2.25);
  CHECK(s(1, 0) == 2.25);
  CHECK_THROWS_AS(SymMatrix(4), std::invalid_argument);

  std::mt19937_64 rng(1);
  for (int n : {2, 3}) {
    const Vector a = random_vector(sym_size(n), rng);
    const SymMatrix A = SymMatrix::from_mandel(n, a);
    CHECK((A.mandel() - a).norm() <= 1e-15);
    CHECK(A.norm() == doctest::Approx(a.norm()).epsilon(1e-14));
    const SymMatrix B = SymMatrix::from_mandel(n, random_vector(sym_size(n), rng));
    CHECK(A.dot(B) == doctest::Approx(A.mandel().dot(B.mandel())).epsilon(1e-14));
  }
}

TEST_CASE("skew matrices and axial vectors") {
  const double r = 0.7;
  const SkewMatrix R = SkewMatrix::from_parameters(2, std::vector<double>{r});
  CHECK(R(0, 1) == -r);
  CHECK(R(1, 0) == r);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Vector3d a = random_vector(3, rng);
    const SkewMatrix S = SkewMatrix::from_axial(a);
    CHECK((S.axial() - a).norm() == 0.0);
    CHECK(SkewMatrix::from_matrix(S.matrix()) == S);
    const Eigen::Vector3d x = random_vector(3, rng);
    CHECK((S.matrix() * x - a.cross(x)).norm() <= 1e-14 * (1.0 + a.norm() * x.norm()));
    CHECK((cross_matrix(a) * x - a.cross(x)).norm() <= 1e-14 * (1.0 + a.norm() * x.norm()));
  }
  Matrix notskew = Matrix::Identity(3, 3);
  CHECK_THROWS_AS(SkewMatrix::from_matrix(notskew), std::invalid_argument);
}

TEST_CASE("rigid motions") {
  const RigidMotion zero(3);
  Vector anywhere(3);
  anywhere << 0.4, -1.5, 2.0;
  CHECK(rigid_eval(zero, anywhere).norm() == 0.0);

  const RigidMotion rot = RigidMotion::from_axial(Eigen::Vector3d::UnitZ(), Eigen::Vector3d::Zero());
  const Vector y = rot(unit(3, 0));
  CHECK(y(0) == 0.0);
  CHECK(y(1) == 1.0);
  CHECK(y(2) == 0.0);

  std::mt19937_64 rng(4);
  for (int n : {2, 3}) {
    for (int t = 0; t < 50; ++t) {
      const Vector p = random_vector(RigidMotion::parameter_count(n), rng);
      const RigidMotion m = RigidMotion::from_parameters(n, {p.data(), static_cast<std::size_t>(p.size())});
      CHECK((m.parameters() - p).norm() == 0.0);
      const Vector x = random_vector(n, rng);
      const Vector z = random_vector(n, rng);
      // skew part is orthogonal to every chord
      CHECK(std::abs((m(x) - m(z)).dot(x - z)) <= 1e-12);
      // the motion is affine in its parameters
      CHECK((rigid_parameter_jacobian(n, x) * p - m(x)).norm() <= 1e-13 * (1.0 + m(x).norm()));
    }
  }
}

TEST_CASE("rigid motion arithmetic") {
  const RigidMotion a = RigidMotion::from_axial({1, 2, 3}, {4, 5, 6});
  const RigidMotion b = RigidMotion::from_axial({-1, 0, 1}, {0, 1, 0});
  Vector x(3);
  x << 0.3, -0.2, 0.9;
  CHECK(((a + b)(x) - (a(x) + b(x))).norm() <= 1e-14);
  CHECK(((a - b)(x) - (a(x) - b(x))).norm() <= 1e-14);
  CHECK(((2.0 * a)(x) - 2.0 * a(x)).norm() <= 1e-14);
}
