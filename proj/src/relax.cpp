#include "relaxlab/relax.hpp"

#include <algorithm>
#include <cmath>

#include "relaxlab/errors.hpp"
#include "relaxlab/random.hpp"

namespace relaxlab {

Vec3 BoundaryDatum::operator()(const Vec3& x) const { return A.padded() * x + b; }

DeformationGradient PiecewiseAffineMap::gradient(std::size_t cell) const {
  std::vector<Vec3> verts, vals;
  for (int v : partition.cells.at(cell)) {
    verts.push_back(partition.vertices[v]);
    vals.push_back(values[v]);
  }
  return simplex_gradient(partition.dim, verts, vals);
}

PiecewiseAffineMap affine_map(const DomainPartition& partition, const BoundaryDatum& g) {
  if (g.A.cols() != partition.dim) throw DimensionMismatch("affine_map: A and partition dimensions differ");
  PiecewiseAffineMap u{partition, {}};
  for (const Vec3& x : partition.vertices) u.values.push_back(g(x));
  return u;
}

double assemble_I(const StoredEnergySpec& spec, const PiecewiseAffineMap& u, double omega_volume, double tol) {
  if (u.values.size() != u.partition.vertices.size())
    throw InvalidArgument("assemble_I: one nodal value per vertex required");
  if (u.partition.dim != spec.N) throw DimensionMismatch("assemble_I: partition and spec dimensions differ");
  const double covered = u.partition.total_cell_volume();
  if (std::abs(covered - omega_volume) > tol * omega_volume)
    throw PartitionGap("assemble_I: cells cover " + std::to_string(covered) + " of " +
                       std::to_string(omega_volume));
  double total = 0.0;
  for (std::size_t c = 0; c < u.partition.cells.size(); ++c) {
    const double w = eval_W(spec, u.gradient(c));
    if (w == kInfinity) return kInfinity;
    total += u.partition.cell_volume(c) * w;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Vitali covers

double Simplex::volume() const { return simplex_volume(dim, vertices); }

namespace {

struct Barycentric {
  Mat3 inv;
  Vec3 origin;
  int dim;

  explicit Barycentric(const Simplex& s) : origin(s.vertices.at(0)), dim(s.dim) {
    Mat3 e = Mat3::identity();
    for (int j = 0; j < dim; ++j)
      for (int i = 0; i < dim; ++i) e(i, j) = s.vertices.at(j + 1)[i] - origin[i];
    if (std::abs(det(e)) == 0.0) throw InvalidArgument("simplex is degenerate");
    inv = inverse(e);
  }

  // lambda_0..lambda_dim
  std::array<double, 4> operator()(const Vec3& x) const {
    Vec3 d = x - origin;
    for (int a = dim; a < 3; ++a) d[a] = 0.0;
    const Vec3 l = inv * d;
    std::array<double, 4> out{};
    double s = 0.0;
    for (int j = 0; j < dim; ++j) {
      out[j + 1] = l[j];
      s += l[j];
    }
    out[0] = 1.0 - s;
    return out;
  }
};

enum class Place { Inside, Outside, Straddles };

Place classify(const Barycentric& bc, const Vec3& corner, double side, double tol) {
  const int corners = 1 << bc.dim;
  bool all_in = true;
  std::array<bool, 4> all_out{true, true, true, true};
  for (int m = 0; m < corners; ++m) {
    Vec3 x = corner;
    for (int a = 0; a < bc.dim; ++a)
      if (m & (1 << a)) x[a] += side;
    const auto l = bc(x);
    for (int k = 0; k <= bc.dim; ++k) {
      if (l[k] < -tol) all_in = false;
      if (l[k] > tol) all_out[k] = false;
    }
  }
  if (all_in) return Place::Inside;
  for (int k = 0; k <= bc.dim; ++k)
    if (all_out[k]) return Place::Outside;
  return Place::Straddles;
}

}  // namespace

bool Simplex::contains(const Vec3& x, double tol) const {
  const auto l = Barycentric(*this)(x);
  for (int k = 0; k <= dim; ++k)
    if (l[k] < -tol) return false;
  return true;
}

VitaliCover vitali_cover(const Simplex& piece, int n, double cover_tol) {
  if (n < 1) throw InvalidArgument("vitali_cover: n must be >= 1");
  if (!(cover_tol > 0.0 && cover_tol <= 1e-3)) throw InvalidArgument("vitali_cover: cover_tol must be in (0, 1e-3]");
  if (piece.dim < 1 || piece.dim > 3 || static_cast<int>(piece.vertices.size()) != piece.dim + 1)
    throw InvalidArgument("vitali_cover: piece must be a simplex with dim + 1 vertices");
  const Barycentric bc(piece);
  const double vol = piece.volume();

  int k = 0;
  while ((1LL << k) <= n) ++k;
  double side = std::ldexp(1.0, -k);  // largest dyadic side < 1/n

  Vec3 lo = piece.vertices[0], hi = piece.vertices[0];
  for (const Vec3& v : piece.vertices)
    for (int a = 0; a < piece.dim; ++a) {
      lo[a] = std::min(lo[a], v[a]);
      hi[a] = std::max(hi[a], v[a]);
    }
  std::vector<Vec3> pending;
  std::array<long long, 3> m0{0, 0, 0}, m1{1, 1, 1};
  for (int a = 0; a < piece.dim; ++a) {
    m0[a] = static_cast<long long>(std::floor(lo[a] / side));
    m1[a] = static_cast<long long>(std::ceil(hi[a] / side));
  }
  for (long long z = m0[2]; z < m1[2]; ++z)
    for (long long y = m0[1]; y < m1[1]; ++y)
      for (long long x = m0[0]; x < m1[0]; ++x) {
        Vec3 c{static_cast<double>(x) * side, static_cast<double>(y) * side, static_cast<double>(z) * side};
        for (int a = piece.dim; a < 3; ++a) c[a] = 0.0;
        pending.push_back(c);
      }

  VitaliCover cover;
  cover.piece = piece;
  cover.n = n;
  const double tol = 1e-12;
  constexpr std::size_t kMaxCubes = 20'000'000;
  while (true) {
    std::vector<Vec3> next;
    const double cube_vol = std::pow(side, piece.dim);
    for (const Vec3& c : pending) {
      switch (classify(bc, c, side, tol)) {
        case Place::Inside:
          cover.cubes.push_back({c, side});
          cover.covered_measure += cube_vol;
          break;
        case Place::Outside:
          break;
        case Place::Straddles:
          next.push_back(c);
          break;
      }
    }
    cover.residual_measure = std::max(0.0, vol - cover.covered_measure);
    if (cover.residual_measure <= cover_tol * vol || next.empty()) break;
    if (cover.cubes.size() + next.size() * (std::size_t(1) << piece.dim) > kMaxCubes)
      throw ResourceGuard("vitali_cover: too many cubes for the requested tolerance");
    const double half = 0.5 * side;
    pending.clear();
    for (const Vec3& c : next)
      for (int m = 0; m < (1 << piece.dim); ++m) {
        Vec3 x = c;
        for (int a = 0; a < piece.dim; ++a)
          if (m & (1 << a)) x[a] += half;
        pending.push_back(x);
      }
    side = half;
  }
  return cover;
}

// ---------------------------------------------------------------------------
// Recovery sequences

namespace {

bool is_unit_cell(const DomainPartition& p) {
  return p.domain == DomainId::UnitInterval || p.domain == DomainId::UnitSquare || p.domain == DomainId::UnitCube;
}

Simplex cell_simplex(const DomainPartition& p, std::size_t c) {
  Simplex s;
  s.dim = p.dim;
  for (int v : p.cells[c]) s.vertices.push_back(p.vertices[v]);
  return s;
}

}  // namespace

RecoverySequence build_recovery(const StoredEnergySpec& spec, const PiecewiseAffineMap& u,
                                const std::vector<PieceWitness>& witnesses, int n, double delta_total,
                                double cover_tol) {
  const DomainPartition& part = u.partition;
  if (part.dim != spec.N) throw DimensionMismatch("build_recovery: u and spec dimensions differ");
  if (witnesses.size() != part.cells.size()) throw InvalidArgument("build_recovery: one witness per piece required");
  if (delta_total < 0.0) throw InvalidArgument("build_recovery: delta_total must be >= 0");
  const double omega = part.total_cell_volume();

  RecoverySequence seq;
  seq.u = u;
  seq.n = n;
  double energy = 0.0, ledger = 0.0;
  for (std::size_t i = 0; i < part.cells.size(); ++i) {
    const PiecewiseAffineWitness& phi = witnesses[i].phi;
    if (phi.partition().dim != spec.N || !is_unit_cell(phi.partition()))
      throw InvalidArgument("build_recovery: witnesses live on the unit cell of dimension N");
    const WitnessCheck chk = check_witness(phi);
    if (!chk.ok) throw InvalidArgument("build_recovery: witness " + std::to_string(i) + ": " + chk.message);

    RecoveryPiece rp;
    rp.xi = u.gradient(i);
    rp.volume = part.cell_volume(i);
    rp.witness_energy = witness_energy(spec, rp.xi, phi);
    rp.base_energy = eval_W(spec, rp.xi);
    const double allowed = witnesses[i].best_known + delta_total / omega;
    if (rp.witness_energy > allowed * (1.0 + 1e-12) + 1e-300)
      throw WitnessGapTooLarge("build_recovery: piece " + std::to_string(i) + " witness energy " +
                               std::to_string(rp.witness_energy) + " exceeds " + std::to_string(allowed));
    rp.cover = vitali_cover(cell_simplex(part, i), n, cover_tol);

    // Planted energy: every cube carries a scaled copy of the witness cells.
    std::vector<double> cell_vol(phi.cell_count()), cell_w(phi.cell_count());
    double phi_max_grad = 0.0;
    for (std::size_t c = 0; c < phi.cell_count(); ++c) {
      cell_vol[c] = phi.partition().cell_volume(c);
      cell_w[c] = eval_W(spec, rp.xi + phi.gradient(c));
      phi_max_grad = std::max(phi_max_grad, phi.gradient(c).norm());
    }
    const double phi_sup = phi.sup_norm();
    double planted = 0.0;
    for (const CoverCube& q : rp.cover.cubes) {
      const double scale = std::pow(q.eps, spec.N);
      double cube = 0.0;
      for (std::size_t c = 0; c < cell_vol.size(); ++c) {
        if (cell_w[c] == kInfinity) {
          cube = kInfinity;
          break;
        }
        cube += scale * cell_vol[c] * cell_w[c];
      }
      planted += cube;
      seq.sup_norm = std::max(seq.sup_norm, q.eps * phi_sup);
    }
    if (!rp.cover.cubes.empty()) seq.max_gradient = std::max(seq.max_gradient, phi_max_grad);
    const double res = rp.cover.residual_measure;
    const double res_term = res > 0.0 ? res * rp.base_energy : 0.0;
    energy += planted + res_term;
    ledger += rp.volume * rp.witness_energy;
    seq.residual_measure += res;
    if (res > 0.0) seq.residual_bound += res * std::max(rp.base_energy, rp.witness_energy);
    seq.pieces.push_back(std::move(rp));
  }
  seq.ledger = ledger;
  seq.energy = energy;
  return seq;
}

// ---------------------------------------------------------------------------
// 1D experiment

namespace {

DomainPartition unit_interval() {
  DomainPartition p;
  p.dim = 1;
  p.domain = DomainId::UnitInterval;
  p.vertices = {kZero3, Vec3{1.0, 0.0, 0.0}};
  p.on_boundary = {1, 1};
  p.cells = {{0, 1}};
  return p;
}

}  // namespace

Relax1DReport relax_experiment_1d(const StoredEnergySpec& spec, const DeformationGradient& A,
                                  const std::vector<int>& levels, int restarts, std::uint64_t seed) {
  if (spec.N != 1) throw PreconditionFailed("relax_experiment_1d: requires N = 1");
  if (A.cols() != 1) throw DimensionMismatch("relax_experiment_1d: A must be 3x1");
  if (levels.empty()) return {};
  for (int L : levels)
    if (L < 0) throw InvalidArgument("relax_experiment_1d: levels must be >= 0");
  const int max_level = *std::max_element(levels.begin(), levels.end());
  if (max_level > MeshSpace::kMaxLevel) throw ResourceGuard("relax_experiment_1d: level exceeds 6");

  const RadialEnvelope1D env = biconjugate_radial(spec);
  const CellIntegrand relaxed = [&env](const Mat3& m) { return env.at(frobenius(m)); };
  const auto ests = z_estimate_levels(spec, A, max_level, restarts, seed);
  const PiecewiseAffineMap u = affine_map(unit_interval(), BoundaryDatum{A, kZero3});

  Relax1DReport rep;
  rep.target = env(A);
  for (int L : levels) {
    const MeshSpace mesh(1, L);
    DescentOptions opt;
    opt.seed = derive_seed(seed, 0x7e1a + static_cast<std::uint64_t>(L));
    const DescentResult r =
        coordinate_descent(mesh, A, relaxed, std::vector<Vec3>(mesh.node_count(), kZero3), opt);
    Relax1DRow row;
    row.level = L;
    row.cells = mesh.divisions();
    row.nonconvex_min = ests[static_cast<std::size_t>(L)].value;
    row.relaxed_min = r.value;
    row.gap = std::abs(row.nonconvex_min - row.relaxed_min);
    row.lower_bound_ok = row.nonconvex_min >= rep.target - 1e-9;
    if (row.nonconvex_min < kInfinity) {
      const PieceWitness pw{ests[static_cast<std::size_t>(L)].witness, row.nonconvex_min};
      row.recovery_energy = build_recovery(spec, u, {pw}, 1, 0.0).energy;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

WeakConvergenceReport weak_convergence_diagnostics(const std::vector<RecoverySequence>& seq) {
  WeakConvergenceReport rep;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const RecoverySequence& s = seq[k];
    if (k > 0 && s.n <= seq[k - 1].n) throw InvalidArgument("weak_convergence_diagnostics: n must increase");
    WeakConvergenceRow row{s.n, s.sup_norm, 0.0, s.max_gradient, s.ledger, s.energy};
    if (k > 0) {
      const RecoverySequence& p = seq[k - 1];
      row.sup_ratio = p.sup_norm > 0.0 ? s.sup_norm / p.sup_norm : 0.0;
      if (std::abs(s.max_gradient - seq[0].max_gradient) > 1e-12 * std::max(1.0, seq[0].max_gradient))
        rep.gradients_constant = false;
      const double dev = std::abs(s.ledger - seq[0].ledger) / std::max(1.0, std::abs(seq[0].ledger));
      rep.max_ledger_deviation = std::max(rep.max_ledger_deviation, dev);
      if (dev > 1e-10) rep.ledger_fixed = false;
    }
    rep.rows.push_back(row);
  }
  return rep;
}

}  // namespace relaxlab
