#include "relaxlab/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "relaxlab/errors.hpp"

namespace relaxlab {

Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }
Vec3 operator*(double t, const Vec3& a) { return {t * a[0], t * a[1], t * a[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

Vec3 unit_vector(int i) {
  Vec3 e{0.0, 0.0, 0.0};
  e.at(static_cast<std::size_t>(i)) = 1.0;
  return e;
}

// ---------------------------------------------------------------------------
// Mat3

Mat3 Mat3::identity() { return diag(1.0, 1.0, 1.0); }

Mat3 Mat3::diag(double a, double b, double c) {
  Mat3 m;
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = c;
  return m;
}

Mat3 Mat3::from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
  Mat3 m;
  for (int j = 0; j < 3; ++j) {
    m(0, j) = r0[j];
    m(1, j) = r1[j];
    m(2, j) = r2[j];
  }
  return m;
}

Mat3 Mat3::from_cols(const Vec3& c0, const Vec3& c1, const Vec3& c2) {
  return transpose(from_rows(c0, c1, c2));
}

Mat3 operator*(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

Mat3 operator+(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int k = 0; k < 9; ++k) c.v[k] = a.v[k] + b.v[k];
  return c;
}

Mat3 operator-(const Mat3& a, const Mat3& b) {
  Mat3 c;
  for (int k = 0; k < 9; ++k) c.v[k] = a.v[k] - b.v[k];
  return c;
}

Mat3 operator*(double t, const Mat3& a) {
  Mat3 c;
  for (int k = 0; k < 9; ++k) c.v[k] = t * a.v[k];
  return c;
}

Vec3 operator*(const Mat3& a, const Vec3& x) {
  return {dot(a.row(0), x), dot(a.row(1), x), dot(a.row(2), x)};
}

Mat3 transpose(const Mat3& a) {
  Mat3 t;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t(i, j) = a(j, i);
  return t;
}

double det(const Mat3& a) { return dot(cross(a.col(0), a.col(1)), a.col(2)); }

double frobenius(const Mat3& a) {
  double s = 0.0;
  for (double x : a.v) s += x * x;
  return std::sqrt(s);
}

double max_abs(const Mat3& a) {
  double m = 0.0;
  for (double x : a.v) m = std::max(m, std::abs(x));
  return m;
}

Mat3 inverse(const Mat3& a) {
  const double d = det(a);
  if (d == 0.0) throw SingularInput("inverse: singular matrix");
  // Rows of the inverse are cross products of columns.
  const Vec3 c0 = a.col(0), c1 = a.col(1), c2 = a.col(2);
  return (1.0 / d) * Mat3::from_rows(cross(c1, c2), cross(c2, c0), cross(c0, c1));
}

Mat3 outer(const Vec3& a, const Vec3& b) {
  Mat3 m;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) m(i, j) = a[i] * b[j];
  return m;
}

// ---------------------------------------------------------------------------
// DeformationGradient

DeformationGradient::DeformationGradient(int n_cols) : n_cols_(n_cols) {
  if (n_cols < 1 || n_cols > 3)
    throw DimensionMismatch("DeformationGradient: N must be 1, 2 or 3, got " + std::to_string(n_cols));
}

DeformationGradient::DeformationGradient(int n_cols, const Mat3& padded) : DeformationGradient(n_cols) {
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < n_cols_; ++j) m_(i, j) = padded(i, j);
}

DeformationGradient DeformationGradient::from_columns(std::initializer_list<Vec3> columns) {
  return from_columns(std::span<const Vec3>(columns.begin(), columns.size()));
}

DeformationGradient DeformationGradient::from_columns(std::span<const Vec3> columns) {
  DeformationGradient g(static_cast<int>(columns.size()));
  for (int j = 0; j < g.cols(); ++j) g.set_col(j, columns[static_cast<std::size_t>(j)]);
  return g;
}

DeformationGradient DeformationGradient::from_row_major(int n_cols, std::span<const double> entries) {
  DeformationGradient g(n_cols);
  if (entries.size() != static_cast<std::size_t>(3 * n_cols))
    throw DimensionMismatch("from_row_major: expected " + std::to_string(3 * n_cols) + " entries, got " +
                            std::to_string(entries.size()));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < n_cols; ++j) g(i, j) = entries[static_cast<std::size_t>(i * n_cols + j)];
  return g;
}

double DeformationGradient::operator()(int i, int j) const {
  if (j < 0 || j >= n_cols_) throw std::out_of_range("DeformationGradient: column index");
  return m_(i, j);
}

double& DeformationGradient::operator()(int i, int j) {
  if (j < 0 || j >= n_cols_) throw std::out_of_range("DeformationGradient: column index");
  return m_(i, j);
}

Vec3 DeformationGradient::col(int j) const {
  if (j < 0 || j >= n_cols_) throw std::out_of_range("DeformationGradient: column index");
  return m_.col(j);
}

void DeformationGradient::set_col(int j, const Vec3& c) {
  if (j < 0 || j >= n_cols_) throw std::out_of_range("DeformationGradient: column index");
  for (int i = 0; i < 3; ++i) m_(i, j) = c[i];
}

bool DeformationGradient::all_finite() const {
  return std::all_of(m_.v.begin(), m_.v.end(), [](double x) { return std::isfinite(x); });
}

DeformationGradient DeformationGradient::operator+(const DeformationGradient& o) const {
  if (o.n_cols_ != n_cols_) throw DimensionMismatch("DeformationGradient +: column count");
  return DeformationGradient(n_cols_, m_ + o.m_);
}

DeformationGradient DeformationGradient::operator-(const DeformationGradient& o) const {
  if (o.n_cols_ != n_cols_) throw DimensionMismatch("DeformationGradient -: column count");
  return DeformationGradient(n_cols_, m_ - o.m_);
}

DeformationGradient operator*(double t, const DeformationGradient& a) {
  return DeformationGradient(a.n_cols_, t * a.m_);
}

// ---------------------------------------------------------------------------
// Rotation3

Rotation3::Rotation3(const Mat3& m) : m_(m) {
  const Mat3 e1 = relaxlab::transpose(m) * m - Mat3::identity();
  const Mat3 e2 = m * relaxlab::transpose(m) - Mat3::identity();
  if (max_abs(e1) > kTolerance || max_abs(e2) > kTolerance || std::abs(det(m) - 1.0) > kTolerance)
    throw NotRotation("Rotation3: matrix is not in SO(3)");
}

Rotation3 Rotation3::transpose() const { return Rotation3(relaxlab::transpose(m_)); }

// ---------------------------------------------------------------------------

double det3(const DeformationGradient& xi) {
  if (xi.cols() != 3) throw DimensionMismatch("det3: requires N = 3");
  return det(xi.padded());
}

Vec3 singular_values(const DeformationGradient& xi) {
  // One-sided Jacobi: rotate column pairs until mutually orthogonal; the
  // column norms are then the singular values. Relative accuracy of small
  // singular values is far better than via eigenvalues of xi^T xi.
  Mat3 a = xi.padded();
  for (int sweep = 0; sweep < 60; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        const Vec3 cp = a.col(p), cq = a.col(q);
        const double alpha = dot(cp, cp), beta = dot(cq, cq), gamma = dot(cp, cq);
        if (gamma == 0.0) continue;
        const double scale = std::sqrt(alpha * beta);
        if (scale == 0.0) continue;
        off = std::max(off, std::abs(gamma) / scale);
        if (std::abs(gamma) <= 1e-300) continue;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < 3; ++i) {
          const double x = a(i, p), y = a(i, q);
          a(i, p) = c * x - s * y;
          a(i, q) = s * x + c * y;
        }
      }
    if (off < 1e-15) break;
  }
  Vec3 sv{norm(a.col(0)), norm(a.col(1)), norm(a.col(2))};
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

int numeric_rank(const DeformationGradient& xi, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("numeric_rank: tol must be positive");
  const Vec3 sv = singular_values(xi);
  const double ref = sv[0] > 0.0 ? sv[0] : 1.0;
  int r = 0;
  for (double s : sv)
    if (s > tol * ref) ++r;
  return r;
}

namespace {

// Solves the 2x2 null vector problem inside the orthogonal complement of
// evec0 (robust for a repeated eigenvalue).
void orthogonal_complement(const Vec3& w, Vec3& u, Vec3& v) {
  if (std::abs(w[0]) > std::abs(w[1])) {
    const double inv = 1.0 / std::sqrt(w[0] * w[0] + w[2] * w[2]);
    u = {-w[2] * inv, 0.0, w[0] * inv};
  } else {
    const double inv = 1.0 / std::sqrt(w[1] * w[1] + w[2] * w[2]);
    u = {0.0, w[2] * inv, -w[1] * inv};
  }
  v = cross(w, u);
}

Vec3 eigenvector_from_rows(const Mat3& a, double lambda) {
  const Vec3 r0{a(0, 0) - lambda, a(0, 1), a(0, 2)};
  const Vec3 r1{a(1, 0), a(1, 1) - lambda, a(1, 2)};
  const Vec3 r2{a(2, 0), a(2, 1), a(2, 2) - lambda};
  const Vec3 c01 = cross(r0, r1), c02 = cross(r0, r2), c12 = cross(r1, r2);
  const double d01 = dot(c01, c01), d02 = dot(c02, c02), d12 = dot(c12, c12);
  const Vec3* best = &c01;
  double dmax = d01;
  if (d02 > dmax) {
    dmax = d02;
    best = &c02;
  }
  if (d12 > dmax) {
    dmax = d12;
    best = &c12;
  }
  if (dmax == 0.0) return unit_vector(0);
  return (1.0 / std::sqrt(dmax)) * *best;
}

Vec3 eigenvector_in_complement(const Mat3& a, const Vec3& evec0, double lambda) {
  Vec3 u, v;
  orthogonal_complement(evec0, u, v);
  const Vec3 au = a * u, av = a * v;
  double m00 = dot(u, au) - lambda;
  double m01 = dot(u, av);
  double m11 = dot(v, av) - lambda;
  const double a00 = std::abs(m00), a01 = std::abs(m01), a11 = std::abs(m11);
  if (a00 >= a11) {
    const double mx = std::max(a00, a01);
    if (mx == 0.0) return u;
    if (a00 >= a01) {
      m01 /= m00;
      m00 = 1.0 / std::sqrt(1.0 + m01 * m01);
      m01 *= m00;
    } else {
      m00 /= m01;
      m01 = 1.0 / std::sqrt(1.0 + m00 * m00);
      m00 *= m01;
    }
    return m01 * u - m00 * v;
  }
  const double mx = std::max(a11, a01);
  if (mx == 0.0) return u;
  if (a11 >= a01) {
    m01 /= m11;
    m11 = 1.0 / std::sqrt(1.0 + m01 * m01);
    m01 *= m11;
  } else {
    m11 /= m01;
    m01 = 1.0 / std::sqrt(1.0 + m11 * m11);
    m11 *= m01;
  }
  return m11 * u - m01 * v;
}

// One Newton step on the characteristic polynomial; rejected if it does not
// reduce the residual.
double newton_polish(const Mat3& a, double lambda) {
  auto charpoly = [&](double x, double& deriv) {
    const Mat3 b = a - x * Mat3::identity();
    const double m0 = b(1, 1) * b(2, 2) - b(1, 2) * b(2, 1);
    const double m1 = b(0, 0) * b(2, 2) - b(0, 2) * b(2, 0);
    const double m2 = b(0, 0) * b(1, 1) - b(0, 1) * b(1, 0);
    deriv = -(m0 + m1 + m2);
    return det(b);
  };
  double d = 0.0;
  const double f = charpoly(lambda, d);
  if (d == 0.0 || !std::isfinite(f / d)) return lambda;
  const double candidate = lambda - f / d;
  double d2 = 0.0;
  const double f2 = charpoly(candidate, d2);
  return std::abs(f2) < std::abs(f) ? candidate : lambda;
}

}  // namespace

SymmetricEigen sym_diagonalize(const Mat3& m) {
  if (max_abs(m - transpose(m)) >= 1e-10) throw NotSymmetric("sym_diagonalize: matrix is not symmetric");
  Mat3 a = 0.5 * (m + transpose(m));

  const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  Vec3 lambda;
  Vec3 evec[3];
  if (off == 0.0) {
    lambda = {a(0, 0), a(1, 1), a(2, 2)};
    for (int i = 0; i < 3; ++i) evec[i] = unit_vector(i);
  } else {
    const double q = (a(0, 0) + a(1, 1) + a(2, 2)) / 3.0;
    const double p2 = (a(0, 0) - q) * (a(0, 0) - q) + (a(1, 1) - q) * (a(1, 1) - q) +
                      (a(2, 2) - q) * (a(2, 2) - q) + 2.0 * off;
    const double p = std::sqrt(p2 / 6.0);
    const Mat3 b = (1.0 / p) * (a - q * Mat3::identity());
    const double r = std::clamp(det(b) / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    double l1 = q + 2.0 * p * std::cos(phi);
    double l3 = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
    double l2 = 3.0 * q - l1 - l3;
    l1 = newton_polish(a, l1);
    l2 = newton_polish(a, l2);
    l3 = newton_polish(a, l3);
    lambda = {l1, l2, l3};

    // Compute the eigenvector of the better-separated extreme eigenvalue first.
    if (l1 - l2 >= l2 - l3) {
      evec[0] = eigenvector_from_rows(a, l1);
      evec[1] = eigenvector_in_complement(a, evec[0], l2);
      evec[2] = cross(evec[0], evec[1]);
    } else {
      evec[2] = eigenvector_from_rows(a, l3);
      evec[1] = eigenvector_in_complement(a, evec[2], l2);
      evec[0] = cross(evec[1], evec[2]);
    }
  }

  // Descending order.
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return lambda[i] > lambda[j]; });
  Vec3 sorted_lambda;
  Vec3 rows[3];
  for (int k = 0; k < 3; ++k) {
    sorted_lambda[k] = lambda[order[k]];
    rows[k] = (1.0 / norm(evec[order[k]])) * evec[order[k]];
  }
  Mat3 q = Mat3::from_rows(rows[0], rows[1], rows[2]);
  if (det(q) < 0.0)
    for (int j = 0; j < 3; ++j) q(2, j) = -q(2, j);
  return {Rotation3(q), sorted_lambda};
}

PolarFactors polar_so3(const DeformationGradient& xi) {
  const double d = det3(xi);
  if (std::abs(d) <= 1e-12) throw SingularInput("polar_so3: |det xi| <= 1e-12");
  const Mat3& x = xi.padded();
  const SymmetricEigen eig = sym_diagonalize(transpose(x) * x);
  const double sign = d > 0.0 ? 1.0 : -1.0;
  const Mat3& q = eig.rotation.matrix();
  Vec3 root;
  for (int k = 0; k < 3; ++k) root[k] = sign * std::sqrt(std::max(eig.eigenvalues[k], 0.0));
  Mat3 m0 = transpose(q) * Mat3::diag(root[0], root[1], root[2]) * q;
  Mat3 p = x * inverse(m0);
  // Newton polish towards the orthogonal factor: P <- (P + P^{-T}) / 2.
  for (int it = 0; it < 3; ++it) {
    const Mat3 next = 0.5 * (p + transpose(inverse(p)));
    const double change = max_abs(next - p);
    p = next;
    if (change < 1e-16) break;
  }
  Mat3 m = transpose(p) * x;
  m = 0.5 * (m + transpose(m));
  return {Rotation3(p), m};
}

Vec3 orthogonal_unit(const Vec3& v, double magnitude) {
  if (!(magnitude > 0.0)) throw InvalidArgument("orthogonal_unit: magnitude must be positive");
  const double nv = norm(v);
  if (nv == 0.0) return magnitude * unit_vector(0);
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(v[i]) < std::abs(v[k])) k = i;
  const Vec3 vhat = (1.0 / nv) * v;
  const Vec3 e = unit_vector(k);
  Vec3 w = e - dot(e, vhat) * vhat;
  // A second pass keeps orthogonality at rounding level.
  w = w - dot(w, vhat) * vhat;
  return (magnitude / norm(w)) * w;
}

}  // namespace relaxlab
