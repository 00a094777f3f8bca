#include "relaxlab/constructions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relaxlab/errors.hpp"

namespace relaxlab {

bool CertifiedBound::holds() const {
  if (witness_energy == kInfinity) return false;
  return witness_energy <= formula_bound * (1.0 + kBoundSlack);
}

bool CertifiedBound::holds_recursively() const {
  if (!holds()) return false;
  return std::all_of(children.begin(), children.end(), [](const CertifiedBound& c) { return c.holds_recursively(); });
}

std::size_t CertifiedBound::depth() const {
  std::size_t d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return children.empty() ? 0 : d + 1;
}

namespace {

void require_N(const StoredEnergySpec& spec, const DeformationGradient& xi, int n, const char* who) {
  spec.validate();
  if (spec.N != n || xi.cols() != n)
    throw DimensionMismatch(std::string(who) + ": requires N = " + std::to_string(n));
}

double growth_envelope(const StoredEnergySpec& spec, const DeformationGradient& m) {
  return 1.0 + std::pow(m.norm(), spec.p);
}

DomainPartition interval_partition() {
  DomainPartition p;
  p.dim = 1;
  p.domain = DomainId::UnitInterval;
  p.vertices = {{0, 0, 0}, {0.5, 0, 0}, {1, 0, 0}};
  p.on_boundary = {1, 0, 1};
  p.cells = {{0, 1}, {1, 2}};
  return p;
}

DomainPartition diamond_partition() {
  DomainPartition p;
  p.dim = 2;
  p.domain = DomainId::Diamond;
  p.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {-1, 0, 0}, {0, -1, 0}};
  p.on_boundary = {0, 1, 1, 1, 1};
  // Quadrants (+,-), (+,+), (-,+), (-,-).
  p.cells = {{0, 1, 4}, {0, 1, 2}, {0, 2, 3}, {0, 3, 4}};
  return p;
}

DomainPartition square_partition() {
  DomainPartition p;
  p.dim = 2;
  p.domain = DomainId::UnitSquare;
  p.vertices = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}, {0.5, 0.5, 0}};
  p.on_boundary = {1, 1, 1, 1, 0};
  // Bottom, right, top, left.
  p.cells = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
  return p;
}

std::vector<Vec3> center_values(std::size_t n, std::size_t center, const Vec3& value) {
  std::vector<Vec3> v(n, kZero3);
  v[center] = value;
  return v;
}

double mean_energy(const StoredEnergySpec& spec, const std::vector<DeformationGradient>& ms) {
  double s = 0.0;
  for (const auto& m : ms) {
    const double e = eval_W(spec, m);
    if (e == kInfinity) return kInfinity;
    s += e;
  }
  return s / static_cast<double>(ms.size());
}

double mean_child_energy(const std::vector<CertifiedBound>& children) {
  double s = 0.0;
  for (const auto& c : children) {
    if (c.witness_energy == kInfinity) return kInfinity;
    s += c.witness_energy;
  }
  return s / static_cast<double>(children.size());
}

bool near(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

}  // namespace

// ---------------------------------------------------------------------------
// N = 1

Construction laminate_1d(const StoredEnergySpec& spec, const DeformationGradient& xi, double alpha) {
  require_N(spec, xi, 1, "laminate_1d");
  if (!(alpha > 0.0)) throw InvalidArgument("laminate_1d: alpha must be positive");
  const double beta = growth_constant(spec, alpha);
  const double r = xi.norm();
  Construction out;
  out.bound.xi = xi;
  if (r > alpha) {
    out.witness = PiecewiseAffineWitness(interval_partition(), std::vector<Vec3>(3, kZero3));
    out.bound.route = "identity";
    out.bound.constant_name = "beta";
    out.bound.constant = beta;
  } else {
    const Vec3 dir = r > 0.0 ? (1.0 / r) * xi.col(0) : orthogonal_unit(kZero3, 1.0);
    const Vec3 nu = (2.0 * alpha) * dir;
    out.witness = PiecewiseAffineWitness(interval_partition(), center_values(3, 1, 0.5 * nu));
    out.bound.route = "laminate_1d";
    out.bound.constant_name = "beta*2^(2p)*max(1,alpha^p)";
    out.bound.constant = beta * std::pow(2.0, 2.0 * spec.p) * std::max(1.0, std::pow(alpha, spec.p));
  }
  out.bound.witness_energy = witness_energy(spec, xi, out.witness);
  out.bound.formula_bound = out.bound.constant * growth_envelope(spec, xi);
  return out;
}

// ---------------------------------------------------------------------------
// N = 2

double diamond_gamma(const StoredEnergySpec& spec, double alpha) {
  return growth_constant(spec, alpha) * std::pow(2.0, 2.0 * spec.p + 1.0);
}

Construction diamond_2d(const StoredEnergySpec& spec, const DeformationGradient& xi, double alpha) {
  require_N(spec, xi, 2, "diamond_2d");
  if (!(alpha > 0.0)) throw InvalidArgument("diamond_2d: alpha must be positive");
  const Vec3 a = xi.col(0), b = xi.col(1);
  const double margin = std::min(norm(a + b), norm(a - b));
  if (margin < alpha * (1.0 - 1e-12))
    throw PreconditionFailed("diamond_2d: min(|xi1+xi2|, |xi1-xi2|) = " + std::to_string(margin) +
                             " < alpha = " + std::to_string(alpha));
  const Vec3 c = cross(a, b);
  const double cn = norm(c);
  Vec3 nu;
  if (cn > 1e-14 * norm(a) * norm(b))
    nu = (1.0 / cn) * c;
  else if (norm(a) > 0.0)
    nu = orthogonal_unit(a, 1.0);
  else
    nu = orthogonal_unit(b, 1.0);
  Construction out;
  out.witness = PiecewiseAffineWitness(diamond_partition(), center_values(5, 0, nu));
  out.bound.xi = xi;
  out.bound.route = "diamond_2d";
  out.bound.constant_name = "gamma=beta*2^(2p+1)";
  out.bound.constant = diamond_gamma(spec, alpha);
  out.bound.witness_energy = witness_energy(spec, xi, out.witness);
  out.bound.formula_bound = out.bound.constant * growth_envelope(spec, xi);
  out.bound.det_margin = kInfinity;
  for (const auto& g : out.witness.gradients()) {
    const DeformationGradient m = xi + g;
    out.bound.det_margin = std::min(out.bound.det_margin, norm(cross(m.col(0), m.col(1))));
  }
  return out;
}

Construction square_split_2d(const StoredEnergySpec& spec, const DeformationGradient& xi, double alpha) {
  require_N(spec, xi, 2, "square_split_2d");
  if (!(alpha > 0.0)) throw InvalidArgument("square_split_2d: alpha must be positive");
  const Vec3 a = xi.col(0), b = xi.col(1);
  const Vec3 c = cross(a, b);
  const double cn = norm(c);
  Vec3 nu;
  if (cn > 1e-14 * norm(a) * norm(b) && cn > 0.0)
    nu = (alpha / cn) * c;
  else if (norm(a) > 0.0)
    nu = orthogonal_unit(a, alpha);
  else if (norm(b) > 0.0)
    nu = orthogonal_unit(b, alpha);
  else
    nu = orthogonal_unit(kZero3, alpha);

  Construction out;
  out.witness = PiecewiseAffineWitness(square_partition(), center_values(5, 4, 0.5 * nu));
  out.bound.xi = xi;
  out.bound.route = "square_split_2d";
  out.bound.constant_name = "max(1,alpha^p)*gamma*2^(p+1)";
  const double gamma = diamond_gamma(spec, alpha);
  out.bound.constant = std::max(1.0, std::pow(alpha, spec.p)) * gamma * std::pow(2.0, spec.p + 1.0);
  for (const auto& g : out.witness.gradients())
    out.bound.children.push_back(diamond_2d(spec, xi + g, alpha).bound);
  out.bound.witness_energy = mean_child_energy(out.bound.children);
  out.bound.formula_bound = out.bound.constant * growth_envelope(spec, xi);
  return out;
}

// ---------------------------------------------------------------------------
// N = 3

const std::array<std::array<int, 3>, 8>& octahedron_signs() {
  static const std::array<std::array<int, 3>, 8> kSigns = {{{1, 1, 1},
                                                            {-1, 1, 1},
                                                            {-1, -1, 1},
                                                            {1, -1, 1},
                                                            {1, 1, -1},
                                                            {-1, 1, -1},
                                                            {-1, -1, -1},
                                                            {1, -1, -1}}};
  return kSigns;
}

DomainPartition octahedron_partition(double s) {
  if (s == 0.0 || !std::isfinite(s)) throw ZeroSlope("octahedron_partition: s must be a nonzero real");
  DomainPartition p;
  p.dim = 3;
  p.domain = DomainId::Octahedron;
  p.slope = s;
  p.vertices = {{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1.0 / s}, {0, 0, -1.0 / s}};
  p.on_boundary = {0, 1, 1, 1, 1, 1, 1};
  for (const auto& sg : octahedron_signs())
    p.cells.push_back({0, sg[0] > 0 ? 1 : 2, sg[1] > 0 ? 3 : 4, sg[2] > 0 ? 5 : 6});
  return p;
}

PiecewiseAffineWitness octahedron_witness(double s, const Vec3& nu) {
  return PiecewiseAffineWitness(octahedron_partition(s), center_values(7, 0, nu));
}

std::array<double, 8> octa_det_table(double lambda, double mu, double s) {
  const double a = std::abs(s - (lambda + mu));  // cells 1, 7
  const double b = std::abs(s + (lambda - mu));  // cells 2, 8
  const double c = std::abs(s + (lambda + mu));  // cells 3, 5
  const double d = std::abs(s - (lambda - mu));  // cells 4, 6
  return {a, b, c, d, c, d, a, b};
}

OctaWitness octa_witness_3d(const StoredEnergySpec& spec, const DeformationGradient& xi, double lambda,
                            double mu, double s) {
  require_N(spec, xi, 3, "octa_witness_3d");
  for (double f : {0.0, lambda - mu, -(lambda - mu), lambda + mu, -(lambda + mu)})
    if (near(s, f)) throw ForbiddenSlope("octa_witness_3d: slope " + std::to_string(s) + " is excluded");
  const Vec3 c = cross(xi.col(0), xi.col(1));
  const double c2 = dot(c, c);
  if (!(c2 > 0.0)) throw SingularInput("octa_witness_3d: xi1 ^ xi2 = 0");
  OctaWitness out;
  out.lambda = lambda;
  out.mu = mu;
  out.s = s;
  out.nu = (1.0 / c2) * c;
  out.witness = octahedron_witness(s, out.nu);
  out.det_expected = octa_det_table(lambda, mu, s);
  out.delta = *std::min_element(out.det_expected.begin(), out.det_expected.end());
  for (std::size_t i = 0; i < 8; ++i) out.det_abs[i] = std::abs(det3(xi + out.witness.gradient(i)));
  return out;
}

double choose_slope(double lambda, double mu) {
  const double m = 1.0 + std::abs(lambda) + std::abs(mu);
  const std::array<double, 5> candidates = {1.0, 2.0, 3.0, m, 2.0 * m};
  const std::array<double, 5> forbidden = {0.0, lambda - mu, -(lambda - mu), lambda + mu, -(lambda + mu)};
  double best = candidates[0];
  double best_margin = -1.0;
  for (double s : candidates) {
    double margin = kInfinity;
    for (double f : forbidden) margin = std::min(margin, std::abs(s - f));
    if (margin > best_margin) {
      best_margin = margin;
      best = s;
    }
  }
  return best;
}

double det_tolerance(const DeformationGradient& xi) { return 1e-8 * (1.0 + std::pow(xi.norm(), 3.0)); }

namespace {

// xi' = xi Pi with xi'_j = xi_{perm[j]}.
DeformationGradient permute_columns(const DeformationGradient& xi, const std::array<int, 3>& perm) {
  return DeformationGradient::from_columns({xi.col(perm[0]), xi.col(perm[1]), xi.col(perm[2])});
}

DeformationGradient unpermute_columns(const DeformationGradient& xp, const std::array<int, 3>& perm) {
  DeformationGradient out(3);
  for (int j = 0; j < 3; ++j) out.set_col(perm[j], xp.col(j));
  return out;
}

CertifiedBound rank_cascade(const StoredEnergySpec& spec, const DeformationGradient& xi, int depth);

// Columns reordered so that xi'_1 ^ xi'_2 is the largest pairwise cross
// product, with xi'_3 = lambda xi'_1 + mu xi'_2.
struct Rank2Frame {
  std::array<int, 3> perm{0, 1, 2};
  DeformationGradient xp;
  double lambda = 0.0, mu = 0.0;
};

Rank2Frame rank2_frame(const DeformationGradient& xi) {
  static constexpr std::array<std::array<int, 3>, 3> kPairs = {{{0, 1, 2}, {0, 2, 1}, {1, 2, 0}}};
  Rank2Frame f;
  double best = -1.0;
  for (const auto& pr : kPairs) {
    const double a = norm(cross(xi.col(pr[0]), xi.col(pr[1])));
    if (a > best) {
      best = a;
      f.perm = pr;
    }
  }
  f.xp = permute_columns(xi, f.perm);
  const Vec3 c = cross(f.xp.col(0), f.xp.col(1));
  const double c2 = dot(c, c);
  f.lambda = dot(cross(f.xp.col(2), f.xp.col(1)), c) / c2;
  f.mu = dot(cross(f.xp.col(0), f.xp.col(2)), c) / c2;
  return f;
}

// Base column (largest norm) first, other columns in their original order.
std::array<int, 3> rank1_perm(const DeformationGradient& xi) {
  int base = 0;
  for (int j = 1; j < 3; ++j)
    if (norm(xi.col(j)) > norm(xi.col(base))) base = j;
  std::array<int, 3> perm{base, 0, 0};
  for (int j = 0, k = 1; j < 3; ++j)
    if (j != base) perm[k++] = j;
  return perm;
}

CertifiedBound rank2_bound(const StoredEnergySpec& spec, const DeformationGradient& xi) {
  const Rank2Frame f = rank2_frame(xi);
  const auto& perm = f.perm;
  const DeformationGradient& xp = f.xp;
  const double lambda = f.lambda, mu = f.mu;
  const double s = choose_slope(lambda, mu);
  const OctaWitness ow = octa_witness_3d(spec, xp, lambda, mu, s);

  CertifiedBound b;
  b.xi = xi;
  b.route = "rank2_octahedron";
  std::vector<DeformationGradient> cells;
  double actual_min = kInfinity;
  double envelope = 0.0;
  for (std::size_t i = 0; i < 8; ++i) {
    const DeformationGradient m = unpermute_columns(xp + ow.witness.gradient(i), perm);
    actual_min = std::min(actual_min, std::abs(det3(m)));
    envelope += growth_envelope(spec, m) / 8.0;
    cells.push_back(m);
  }
  b.det_margin = std::min(ow.delta, actual_min);
  b.constant = kInfinity;
  if (b.det_margin > 0.0) {
    try {
      b.constant = growth_constant(spec, b.det_margin);
    } catch (const ProfileUnbounded&) {
    }
  }
  b.constant_name = "c_delta";
  b.witness_energy = mean_energy(spec, cells);
  b.formula_bound = b.constant * envelope;
  return b;
}

CertifiedBound rank1_bound(const StoredEnergySpec& spec, const DeformationGradient& xi, int depth) {
  const std::array<int, 3> perm = rank1_perm(xi);
  const DeformationGradient xp = permute_columns(xi, perm);
  const Vec3 e = xp.col(0);
  const double mu = dot(xp.col(2), e) / dot(e, e);
  const double s = choose_slope(mu, 0.0);
  const Vec3 nu = orthogonal_unit(e, 1.0);
  const PiecewiseAffineWitness w = octahedron_witness(s, nu);

  CertifiedBound b;
  b.xi = xi;
  b.route = "rank1_octahedron";
  b.constant_name = "max_children";
  for (std::size_t i = 0; i < 8; ++i)
    b.children.push_back(rank_cascade(spec, unpermute_columns(xp + w.gradient(i), perm), depth + 1));
  b.witness_energy = mean_child_energy(b.children);
  b.formula_bound = 0.0;
  b.det_margin = kInfinity;
  for (const auto& c : b.children) {
    b.formula_bound = std::max(b.formula_bound, c.formula_bound);
    b.det_margin = std::min(b.det_margin, c.det_margin);
    b.constant = std::max(b.constant, c.constant);
  }
  return b;
}

CertifiedBound rank0_bound(const StoredEnergySpec& spec, const DeformationGradient& xi, int depth) {
  const PiecewiseAffineWitness w = octahedron_witness(1.0, unit_vector(0));
  CertifiedBound b;
  b.xi = xi;
  b.route = "rank0_octahedron";
  b.constant_name = "max_children";
  for (std::size_t i = 0; i < 8; ++i) b.children.push_back(rank_cascade(spec, xi + w.gradient(i), depth + 1));
  b.witness_energy = mean_child_energy(b.children);
  b.formula_bound = 0.0;
  b.det_margin = kInfinity;
  for (const auto& c : b.children) {
    b.formula_bound = std::max(b.formula_bound, c.formula_bound);
    b.det_margin = std::min(b.det_margin, c.det_margin);
    b.constant = std::max(b.constant, c.constant);
  }
  return b;
}

CertifiedBound rank_cascade(const StoredEnergySpec& spec, const DeformationGradient& xi, int depth) {
  if (depth > 3) throw Error("rank cascade did not terminate");
  const int rank = std::min(numeric_rank(xi), 2);
  switch (rank) {
    case 2:
      return rank2_bound(spec, xi);
    case 1:
      return rank1_bound(spec, xi, depth);
    default:
      return rank0_bound(spec, xi, depth);
  }
}

}  // namespace

CertifiedBound rank_deficient_bound_3d(const StoredEnergySpec& spec, const DeformationGradient& xi) {
  require_N(spec, xi, 3, "rank_deficient_bound_3d");
  if (std::abs(det3(xi)) > det_tolerance(xi))
    throw PreconditionFailed("rank_deficient_bound_3d: |det xi| exceeds det_tol");
  return rank_cascade(spec, xi, 0);
}

PiecewiseAffineWitness rank_cascade_witness(const DeformationGradient& xi) {
  if (xi.cols() != 3) throw DimensionMismatch("rank_cascade_witness: requires 3 columns");
  std::array<int, 3> perm{0, 1, 2};
  double s = 1.0;
  Vec3 nu = unit_vector(0);
  switch (std::min(numeric_rank(xi), 2)) {
    case 2: {
      const Rank2Frame f = rank2_frame(xi);
      perm = f.perm;
      s = choose_slope(f.lambda, f.mu);
      const Vec3 c = cross(f.xp.col(0), f.xp.col(1));
      nu = (1.0 / dot(c, c)) * c;
      break;
    }
    case 1: {
      perm = rank1_perm(xi);
      const DeformationGradient xp = permute_columns(xi, perm);
      const Vec3 e = xp.col(0);
      s = choose_slope(dot(xp.col(2), e) / dot(e, e), 0.0);
      nu = orthogonal_unit(e, 1.0);
      break;
    }
    default:
      break;
  }
  const PiecewiseAffineWitness w = octahedron_witness(s, nu);
  DomainPartition part = w.partition();
  for (auto& v : part.vertices) {
    Vec3 out{};
    for (int j = 0; j < 3; ++j) out[perm[j]] = v[j];
    v = out;
  }
  return PiecewiseAffineWitness(std::move(part), w.nodal_values());
}

// ---------------------------------------------------------------------------
// Diagonal case analysis

DiagonalConstants diagonal_constants(const StoredEnergySpec& spec) {
  DiagonalConstants k;
  k.p = spec.p;
  k.c1 = growth_constant(spec, 1.0);
  k.c2 = k.c1 * std::pow(2.0, spec.p) * (1.0 + std::pow(2.0 * std::sqrt(3.0), spec.p));
  k.c3 = std::pow(2.0, 2.0 * spec.p) * std::max(k.c1, k.c2);
  k.c0 = k.c3 * (1.0 + std::pow(1.0 + 2.0 * std::sqrt(3.0), spec.p));
  k.c = std::max({k.c0, k.c2, k.c3});
  return k;
}

namespace {

constexpr double kUnitTol = 1e-12;

bool is_big(double x) { return std::abs(x) >= 1.0 - kUnitTol; }
double sign_of(double x) { return x >= 0.0 ? 1.0 : -1.0; }

DeformationGradient diag_matrix(const Vec3& d) { return DeformationGradient(3, Mat3::diag(d[0], d[1], d[2])); }

struct DiagonalRouter {
  const StoredEnergySpec& spec;
  DiagonalConstants k;

  CertifiedBound leaf_c1(const Vec3& d) const {
    CertifiedBound b;
    b.xi = diag_matrix(d);
    b.route = "c1";
    b.constant_name = "c1";
    b.constant = k.c1;
    b.det_margin = std::abs(d[0] * d[1] * d[2]);
    b.witness_energy = eval_W(spec, b.xi);
    b.formula_bound = k.c1 * growth_envelope(spec, b.xi);
    return b;
  }

  // Octahedron with s = 1 and nu = 2 e_k, where |d_k| <= 1 and the other two
  // entries have modulus >= 1.
  CertifiedBound octa_leaf(const Vec3& d, int kk) const {
    CertifiedBound b;
    b.xi = diag_matrix(d);
    b.route = "diag_octahedron";
    b.constant_name = "c2";
    b.constant = k.c2;
    const PiecewiseAffineWitness w = octahedron_witness(1.0, 2.0 * unit_vector(kk));
    std::vector<DeformationGradient> cells;
    b.det_margin = kInfinity;
    for (const auto& g : w.gradients()) {
      cells.push_back(b.xi + g);
      b.det_margin = std::min(b.det_margin, std::abs(det3(cells.back())));
    }
    b.witness_energy = mean_energy(spec, cells);
    b.formula_bound = k.c2 * growth_envelope(spec, b.xi);
    return b;
  }

  // Rank-one split on entry m: the children carry 2 d_m + sign(d_m) and
  // -sign(d_m) there.
  std::vector<CertifiedBound> split(const Vec3& d, int m) const {
    const double sg = sign_of(d[m]);
    Vec3 plus = d, minus = d;
    plus[m] = 2.0 * d[m] + sg;
    minus[m] = -sg;
    return {dispatch(plus, false), dispatch(minus, false)};
  }

  CertifiedBound split_node(const Vec3& d, int big) const {
    CertifiedBound b;
    b.xi = diag_matrix(d);
    b.route = "diag_split";
    b.constant_name = "c3";
    b.constant = k.c3;
    b.children = split(d, (big + 1) % 3);
    b.witness_energy = mean_child_energy(b.children);
    b.formula_bound = k.c3 * growth_envelope(spec, b.xi);
    b.det_margin = std::min(b.children[0].det_margin, b.children[1].det_margin);
    return b;
  }

  CertifiedBound small_ball(const Vec3& d) const {
    int m = 0;
    for (int i = 1; i < 3; ++i)
      if (std::abs(d[i]) > std::abs(d[m])) m = i;
    CertifiedBound b;
    b.xi = diag_matrix(d);
    b.route = "small_ball";
    b.constant_name = "c0";
    b.constant = k.c0;
    b.children = split(d, m);
    b.witness_energy = mean_child_energy(b.children);
    b.formula_bound = k.c0 * growth_envelope(spec, b.xi);
    b.det_margin = std::min(b.children[0].det_margin, b.children[1].det_margin);
    return b;
  }

  CertifiedBound dispatch(const Vec3& d, bool allow_small) const {
    if (std::abs(d[0] * d[1] * d[2]) >= 1.0 - kUnitTol) return leaf_c1(d);
    if (allow_small && d[0] * d[0] + d[1] * d[1] + d[2] * d[2] <= 3.0) return small_ball(d);
    int n_big = 0;
    for (double x : d) n_big += is_big(x) ? 1 : 0;
    if (n_big >= 2) {
      int kk = -1;
      for (int i = 0; i < 3 && kk < 0; ++i)
        if (!is_big(d[i])) kk = i;
      if (kk < 0) {
        kk = 0;
        for (int i = 1; i < 3; ++i)
          if (std::abs(d[i]) < std::abs(d[kk])) kk = i;
      }
      return octa_leaf(d, kk);
    }
    if (n_big == 1) {
      int big = 0;
      while (!is_big(d[big])) ++big;
      return split_node(d, big);
    }
    return small_ball(d);
  }
};

}  // namespace

CertifiedBound diagonal_bound_3d(const StoredEnergySpec& spec, const DeformationGradient& xi) {
  require_N(spec, xi, 3, "diagonal_bound_3d");
  const double scale = 1e-12 * (1.0 + xi.norm());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      if (i != j && std::abs(xi(i, j)) > scale) throw NotDiagonal("diagonal_bound_3d: xi is not diagonal");
  const DiagonalRouter router{spec, diagonal_constants(spec)};
  return router.dispatch({xi(0, 0), xi(1, 1), xi(2, 2)}, true);
}

CertifiedBound so3_reduce_bound(const StoredEnergySpec& spec, const DeformationGradient& xi) {
  require_N(spec, xi, 3, "so3_reduce_bound");
  if (std::abs(det3(xi)) <= det_tolerance(xi))
    throw SingularInput("so3_reduce_bound: |det xi| <= det_tol; use rank_deficient_bound_3d");
  const PolarFactors pf = polar_so3(xi);
  const SymmetricEigen se = sym_diagonalize(pf.stretch);
  const Vec3& z = se.eigenvalues;
  CertifiedBound b;
  b.xi = xi;
  b.route = "so3_reduce";
  b.constant_name = "c";
  b.constant = diagonal_constants(spec).c;
  b.children.push_back(diagonal_bound_3d(spec, diag_matrix(z)));
  b.witness_energy = b.children[0].witness_energy;
  b.det_margin = b.children[0].det_margin;
  b.formula_bound = b.constant * growth_envelope(spec, xi);
  return b;
}

CertifiedBound certified_bound(const StoredEnergySpec& spec, const DeformationGradient& xi, double alpha) {
  spec.validate();
  if (xi.cols() != spec.N) throw DimensionMismatch("certified_bound: xi columns differ from N");
  switch (spec.N) {
    case 1:
      return laminate_1d(spec, xi, alpha).bound;
    case 2:
      return square_split_2d(spec, xi, alpha).bound;
    default:
      if (std::abs(det3(xi)) <= det_tolerance(xi)) return rank_deficient_bound_3d(spec, xi);
      return so3_reduce_bound(spec, xi);
  }
}

}  // namespace relaxlab
