#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "relaxlab/errors.hpp"
#include "relaxlab/random.hpp"
#include "relaxlab/tensor.hpp"

using namespace relaxlab;

namespace {

double max_diff(const Mat3& a, const Mat3& b) { return max_abs(a - b); }

DeformationGradient cols3(const Vec3& a, const Vec3& b, const Vec3& c) {
  return DeformationGradient::from_columns({a, b, c});
}

}  // namespace

TEST_CASE("cross product examples") {
  const Vec3 e1 = unit_vector(0), e2 = unit_vector(1), e3 = unit_vector(2);
  CHECK(cross(e1, e2) == e3);
  const Vec3 v{0.3, -1.2, 4.0};
  CHECK(norm(cross(v, v)) == 0.0);
  const Vec3 c = cross({1, 2, 3}, {4, 5, 6});
  CHECK(c[0] == -3.0);
  CHECK(c[1] == 6.0);
  CHECK(c[2] == -3.0);
}

TEST_CASE("determinant examples") {
  CHECK(det3(DeformationGradient(3, Mat3::identity())) == doctest::Approx(1.0));
  CHECK(det3(DeformationGradient(3, Mat3::diag(2, 1, -1))) == doctest::Approx(-2.0));
  const Vec3 a{1.0, 0.5, -2.0}, b{0.2, 3.0, 1.0};
  CHECK(std::abs(det3(cols3(a, b, 2.0 * a + (-3.0) * b))) < 1e-12);
  CHECK_THROWS_AS(det3(DeformationGradient::zero(2)), DimensionMismatch);
}

TEST_CASE("numeric rank") {
  const Vec3 e1 = unit_vector(0), e2 = unit_vector(1), e3 = unit_vector(2);
  CHECK(numeric_rank(DeformationGradient::zero(3)) == 0);
  CHECK(numeric_rank(cols3(e1, 2.0 * e1, 3.0 * e1)) == 1);
  CHECK(numeric_rank(cols3(e1, e2, e1 + e2)) == 2);
  CHECK(numeric_rank(cols3(e1, e2, e3)) == 3);
  CHECK(numeric_rank(DeformationGradient::from_columns({e1, e2})) == 2);
}

TEST_CASE("singular values are sorted and match a diagonal") {
  const Vec3 s = singular_values(DeformationGradient(3, Mat3::diag(-1, 3, 2)));
  CHECK(s[0] == doctest::Approx(3.0));
  CHECK(s[1] == doctest::Approx(2.0));
  CHECK(s[2] == doctest::Approx(1.0));
}

TEST_CASE("polar factorization") {
  SUBCASE("identity") {
    const PolarFactors f = polar_so3(DeformationGradient(3, Mat3::identity()));
    CHECK(max_diff(f.rotation.matrix(), Mat3::identity()) < 1e-12);
    CHECK(max_diff(f.stretch, Mat3::identity()) < 1e-12);
  }
  SUBCASE("diag(2,1,-1)") {
    const PolarFactors f = polar_so3(DeformationGradient(3, Mat3::diag(2, 1, -1)));
    CHECK(max_diff(f.rotation.matrix(), Mat3::diag(-1, -1, 1)) < 1e-12);
    CHECK(max_diff(f.stretch, Mat3::diag(-2, -1, -1)) < 1e-12);
  }
  SUBCASE("random reconstruction") {
    Rng rng(7);
    for (int k = 0; k < 200; ++k) {
      const DeformationGradient xi = rng.gaussian_matrix(3, 2.0);
      const PolarFactors f = polar_so3(xi);
      const Mat3& P = f.rotation.matrix();
      CHECK(max_diff(transpose(P) * P, Mat3::identity()) < 1e-12);
      CHECK(det(P) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(max_diff(f.stretch, transpose(f.stretch)) < 1e-12);
      CHECK(max_diff(P * f.stretch, xi.padded()) < 1e-9 * (1 + xi.norm()));
    }
  }
  CHECK_THROWS_AS(polar_so3(DeformationGradient(3, Mat3::diag(1, 1, 0))), SingularInput);
}

TEST_CASE("symmetric diagonalization") {
  SUBCASE("identity") {
    const SymmetricEigen e = sym_diagonalize(Mat3::identity());
    for (double l : e.eigenvalues) CHECK(l == doctest::Approx(1.0));
  }
  SUBCASE("already diagonal") {
    const SymmetricEigen e = sym_diagonalize(Mat3::diag(1, 3, 2));
    CHECK(e.eigenvalues[0] == doctest::Approx(3.0));
    CHECK(e.eigenvalues[1] == doctest::Approx(2.0));
    CHECK(e.eigenvalues[2] == doctest::Approx(1.0));
    const Mat3& Q = e.rotation.matrix();
    CHECK(max_diff(transpose(Q) * Mat3::diag(3, 2, 1) * Q, Mat3::diag(1, 3, 2)) < 1e-12);
  }
  SUBCASE("spectrum recovery") {
    Rng rng(11);
    for (int k = 0; k < 100; ++k) {
      const Mat3 Q = rng.rotation().matrix();
      const Mat3 M = transpose(Q) * Mat3::diag(5, 1, -2) * Q;
      const SymmetricEigen e = sym_diagonalize(M);
      CHECK(e.eigenvalues[0] == doctest::Approx(5.0).epsilon(1e-10));
      CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(e.eigenvalues[2] == doctest::Approx(-2.0).epsilon(1e-10));
      const Mat3& R = e.rotation.matrix();
      const Mat3 back = transpose(R) * Mat3::diag(e.eigenvalues[0], e.eigenvalues[1], e.eigenvalues[2]) * R;
      CHECK(max_diff(back, M) < 1e-10);
    }
  }
  SUBCASE("repeated eigenvalues") {
    Rng rng(5);
    const Mat3 Q = rng.rotation().matrix();
    const Mat3 M = transpose(Q) * Mat3::diag(2, 2, -1) * Q;
    const SymmetricEigen e = sym_diagonalize(M);
    const Mat3& R = e.rotation.matrix();
    CHECK(max_diff(transpose(R) * Mat3::diag(e.eigenvalues[0], e.eigenvalues[1], e.eigenvalues[2]) * R, M) <
          1e-10);
  }
  Mat3 a = Mat3::identity();
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(sym_diagonalize(a), NotSymmetric);
}

TEST_CASE("polar then spectral reconstruction") {
  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    const DeformationGradient xi = rng.gaussian_matrix(3, 2.0);
    const PolarFactors f = polar_so3(xi);
    const SymmetricEigen e = sym_diagonalize(f.stretch);
    const Mat3& P = f.rotation.matrix();
    const Mat3& Q = e.rotation.matrix();
    const Mat3 zeta = Mat3::diag(e.eigenvalues[0], e.eigenvalues[1], e.eigenvalues[2]);
    CHECK(max_diff(P * transpose(Q) * zeta * Q, xi.padded()) < 1e-9);
    CHECK(frobenius(zeta) == doctest::Approx(xi.norm()).epsilon(1e-12));
  }
}

TEST_CASE("orthogonal_unit convention") {
  const Vec3 v = orthogonal_unit(unit_vector(0), 1.0);
  CHECK(dot(v, unit_vector(0)) == 0.0);
  CHECK(norm(v) == doctest::Approx(1.0));
  const Vec3 z = orthogonal_unit(kZero3, 2.0);
  CHECK(z == Vec3{2.0, 0.0, 0.0});
  const Vec3 w = orthogonal_unit({1, 1, 1}, 5.0);
  CHECK(norm(w) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::abs(dot(w, {1, 1, 1})) < 1e-12);
}

TEST_CASE("Lagrange identity for nu along the cross product") {
  Rng rng(17);
  int tested = 0;
  for (int k = 0; k < 1000; ++k) {
    const Vec3 a = rng.normal3(), b = rng.normal3();
    const Vec3 c = cross(a, b);
    if (norm(c) <= 1e-6) continue;
    const Vec3 nu = (1.0 / norm(c)) * c;
    const double lhs = std::pow(norm(cross(a - nu, b + nu)), 2);
    const double rhs = std::pow(norm(c), 2) + std::pow(norm(cross(a + b, nu)), 2);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (1 + rhs));
    CHECK(norm(cross(a + b, nu)) == doctest::Approx(norm(a + b)).epsilon(1e-10));
    ++tested;
  }
  CHECK(tested > 900);
}

TEST_CASE("rotation invariance of norm and determinant") {
  Rng rng(23);
  for (int k = 0; k < 500; ++k) {
    const DeformationGradient xi = rng.gaussian_matrix(3);
    const Mat3 P = rng.rotation().matrix(), Q = rng.rotation().matrix();
    const Mat3 r = P * xi.padded() * Q;
    CHECK(std::abs(frobenius(r) - xi.norm()) <= 1e-12 * (1 + xi.norm()));
    CHECK(std::abs(std::abs(det(r)) - std::abs(det(xi.padded()))) <= 1e-12 * (1 + std::pow(xi.norm(), 3)));
  }
}

TEST_CASE("Rotation3 validation and deformation gradient accessors") {
  CHECK_THROWS_AS(Rotation3(Mat3::diag(1, 1, -1)), NotRotation);
  CHECK_THROWS_AS(Rotation3(Mat3::diag(2, 1, 0.5)), NotRotation);
  const double entries[] = {1, 2, 3, 4, 5, 6};
  const DeformationGradient xi = DeformationGradient::from_row_major(2, entries);
  CHECK(xi.cols() == 2);
  CHECK(xi(1, 0) == 3.0);
  CHECK(xi.col(1) == Vec3{2, 4, 6});
  CHECK(xi.padded()(0, 2) == 0.0);
  CHECK(xi.norm() == doctest::Approx(std::sqrt(91.0)));
}
