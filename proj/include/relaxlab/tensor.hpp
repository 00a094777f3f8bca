#ifndef RELAXLAB_TENSOR_HPP
#define RELAXLAB_TENSOR_HPP

// Small dense algebra on R^3 and M^{3xN}, N <= 3.

#include <array>
#include <initializer_list>
#include <span>
#include <utility>

namespace relaxlab {

using Vec3 = std::array<double, 3>;

inline constexpr Vec3 kZero3{0.0, 0.0, 0.0};

Vec3 operator+(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a, const Vec3& b);
Vec3 operator-(const Vec3& a);
Vec3 operator*(double t, const Vec3& a);
double dot(const Vec3& a, const Vec3& b);
double norm(const Vec3& a);
Vec3 cross(const Vec3& a, const Vec3& b);
Vec3 unit_vector(int i);

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> v{};

  double& operator()(int i, int j) { return v[3 * i + j]; }
  double operator()(int i, int j) const { return v[3 * i + j]; }

  static Mat3 identity();
  static Mat3 diag(double a, double b, double c);
  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2);
  static Mat3 from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2);

  Vec3 row(int i) const { return {v[3 * i], v[3 * i + 1], v[3 * i + 2]}; }
  Vec3 col(int j) const { return {v[j], v[3 + j], v[6 + j]}; }
};

Mat3 operator*(const Mat3& a, const Mat3& b);
Mat3 operator+(const Mat3& a, const Mat3& b);
Mat3 operator-(const Mat3& a, const Mat3& b);
Mat3 operator*(double t, const Mat3& a);
Vec3 operator*(const Mat3& a, const Vec3& x);
Mat3 transpose(const Mat3& a);
double det(const Mat3& a);
double frobenius(const Mat3& a);
double max_abs(const Mat3& a);
Mat3 inverse(const Mat3& a);
Mat3 outer(const Vec3& a, const Vec3& b);

/// A 3xN matrix, N in {1,2,3}; the argument of a stored-energy function.
/// Storage is a padded 3x3 whose unused columns stay zero.
class DeformationGradient {
 public:
  DeformationGradient() = default;
  explicit DeformationGradient(int n_cols);
  DeformationGradient(int n_cols, const Mat3& padded);

  static DeformationGradient zero(int n_cols) { return DeformationGradient(n_cols); }
  static DeformationGradient from_columns(std::initializer_list<Vec3> columns);
  static DeformationGradient from_columns(std::span<const Vec3> columns);
  /// Row-major entries, 3*N values.
  static DeformationGradient from_row_major(int n_cols, std::span<const double> entries);

  int cols() const { return n_cols_; }
  double operator()(int i, int j) const;
  double& operator()(int i, int j);
  Vec3 col(int j) const;
  void set_col(int j, const Vec3& c);

  /// The padded 3x3 representation (zero columns beyond N).
  const Mat3& padded() const { return m_; }

  double norm() const { return frobenius(m_); }
  bool all_finite() const;

  DeformationGradient operator+(const DeformationGradient& o) const;
  DeformationGradient operator-(const DeformationGradient& o) const;
  friend DeformationGradient operator*(double t, const DeformationGradient& a);

 private:
  int n_cols_ = 3;
  Mat3 m_{};
};

/// Element of SO(3); the constructor validates orthogonality and det = 1.
class Rotation3 {
 public:
  static constexpr double kTolerance = 1e-12;

  Rotation3() : m_(Mat3::identity()) {}
  /// Throws NotRotation if the matrix is not in SO(3) within kTolerance.
  explicit Rotation3(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  Rotation3 transpose() const;

 private:
  Mat3 m_;
};

/// Determinant of a 3x3 deformation gradient; throws DimensionMismatch if N != 3.
double det3(const DeformationGradient& xi);

/// Singular values in descending order (one-sided Jacobi on the padded 3x3).
Vec3 singular_values(const DeformationGradient& xi);

inline constexpr double kDefaultRankTolerance = 1e-10;

/// Number of singular values above tol * (largest singular value, or 1 if all vanish).
int numeric_rank(const DeformationGradient& xi, double tol = kDefaultRankTolerance);

struct PolarFactors {
  Rotation3 rotation;  // P
  Mat3 stretch;        // M, symmetric, with P M = xi
};

/// P M = xi with P in SO(3) and M = +-sqrt(xi^T xi) (sign of det xi).
/// Throws SingularInput when |det xi| <= 1e-12.
PolarFactors polar_so3(const DeformationGradient& xi);

struct SymmetricEigen {
  Rotation3 rotation;  // Q, rows are eigenvectors
  Vec3 eigenvalues;    // descending; M = Q^T diag(eigenvalues) Q
};

/// Closed-form eigen-decomposition of a symmetric 3x3 matrix.
/// Throws NotSymmetric when max|M - M^T| >= 1e-10.
SymmetricEigen sym_diagonalize(const Mat3& m);

/// Vector of the given magnitude orthogonal to v, built from the canonical
/// basis vector least aligned with v (lowest index on ties). v = 0 yields
/// magnitude * e1.
Vec3 orthogonal_unit(const Vec3& v, double magnitude);

}  // namespace relaxlab

#endif  // RELAXLAB_TENSOR_HPP
