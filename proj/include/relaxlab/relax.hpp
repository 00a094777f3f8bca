#ifndef RELAXLAB_RELAX_HPP
#define RELAXLAB_RELAX_HPP

#include <cstdint>
#include <vector>

#include "relaxlab/energy.hpp"
#include "relaxlab/envelope.hpp"
#include "relaxlab/witness.hpp"

namespace relaxlab {

/// g(x) = A x + b.
struct BoundaryDatum {
  DeformationGradient A;
  Vec3 b{};

  Vec3 operator()(const Vec3& x) const;
};

/// A continuous piecewise-affine map given by nodal values on a simplicial
/// partition of Omega.
struct PiecewiseAffineMap {
  DomainPartition partition;
  std::vector<Vec3> values;

  DeformationGradient gradient(std::size_t cell) const;
};

/// The affine map g sampled on a partition.
PiecewiseAffineMap affine_map(const DomainPartition& partition, const BoundaryDatum& g);

/// Sum over cells of |cell| W(grad u). Throws PartitionGap when the cell
/// volumes miss omega_volume by more than tol * omega_volume.
double assemble_I(const StoredEnergySpec& spec, const PiecewiseAffineMap& u, double omega_volume,
                  double tol = 1e-12);

/// A simplex (dim + 1 vertices) in R^dim.
struct Simplex {
  int dim = 1;
  std::vector<Vec3> vertices;

  double volume() const;
  /// Barycentric containment with a relative tolerance.
  bool contains(const Vec3& x, double tol = 1e-12) const;
};

struct CoverCube {
  Vec3 corner{};  // a: the copy is a + eps Y with Y = ]0,1[^N
  double eps = 0.0;
};

struct VitaliCover {
  Simplex piece;
  int n = 1;
  std::vector<CoverCube> cubes;
  double covered_measure = 0.0;
  double residual_measure = 0.0;
};

inline constexpr double kDefaultCoverTol = 1e-4;

/// Dyadic packing of the piece by cubes of side < 1/n: cubes inside the piece
/// are kept, cubes outside are dropped, the rest are bisected until the
/// uncovered measure is at most cover_tol |piece|. Requires n >= 1 and
/// 0 < cover_tol <= 1e-3.
VitaliCover vitali_cover(const Simplex& piece, int n, double cover_tol = kDefaultCoverTol);

/// Witness planted on one piece, together with the best known estimate of
/// ZW(xi_i) it is compared against.
struct PieceWitness {
  PiecewiseAffineWitness phi;  // on the unit interval, square or cube
  double best_known = kInfinity;
};

struct RecoveryPiece {
  DeformationGradient xi;
  double volume = 0.0;
  double witness_energy = 0.0;  // E_i = mean of W(xi_i + grad phi_i) over Y
  double base_energy = 0.0;     // W(xi_i), charged on the uncovered residual
  VitaliCover cover;
};

struct RecoverySequence {
  PiecewiseAffineMap u;
  std::vector<RecoveryPiece> pieces;
  int n = 1;
  double ledger = 0.0;          // sum |Omega_i| E_i
  double energy = 0.0;          // I(u + psi_n) assembled over planted cells and residual
  double residual_measure = 0.0;
  double residual_bound = 0.0;  // residual * max finite cell energy
  double sup_norm = 0.0;        // max eps ||phi_i||_inf over the cover
  double max_gradient = 0.0;    // max |grad psi_n| over planted cells
};

/// Plants eps phi_i((x - a)/eps) in every cube of a Vitali cover of each piece
/// at scale 1/n. Throws WitnessGapTooLarge when some E_i exceeds
/// best_known_i + delta_total / |Omega|.
RecoverySequence build_recovery(const StoredEnergySpec& spec, const PiecewiseAffineMap& u,
                                const std::vector<PieceWitness>& witnesses, int n, double delta_total,
                                double cover_tol = kDefaultCoverTol);

struct Relax1DRow {
  int level = 0;
  int cells = 0;
  double nonconvex_min = kInfinity;
  double relaxed_min = kInfinity;
  double gap = kInfinity;
  double recovery_energy = kInfinity;  // I(u + psi_1) for the relaxed affine minimiser
  bool lower_bound_ok = true;          // nonconvex_min >= W**(A) - 1e-9
};

struct Relax1DReport {
  double target = 0.0;  // |Omega| W**(A)
  std::vector<Relax1DRow> rows;
};

/// Minimises I and the relaxed functional with integrand W** over nodal
/// values on (0,1) with u(0) = 0 and u(1) = A, for each requested level.
Relax1DReport relax_experiment_1d(const StoredEnergySpec& spec, const DeformationGradient& A,
                                  const std::vector<int>& levels, int restarts = 2, std::uint64_t seed = 0);

struct WeakConvergenceRow {
  int n = 1;
  double sup_norm = 0.0;
  double sup_ratio = 0.0;  // sup_norm / previous sup_norm (0 for the first row)
  double max_gradient = 0.0;
  double ledger = 0.0;
  double energy = 0.0;
};

struct WeakConvergenceReport {
  std::vector<WeakConvergenceRow> rows;
  bool gradients_constant = true;
  bool ledger_fixed = true;
  double max_ledger_deviation = 0.0;  // relative
};

/// Sup-norm decay, gradient bound and ledger over a sequence indexed by
/// increasing n. Throws InvalidArgument if n is not increasing.
WeakConvergenceReport weak_convergence_diagnostics(const std::vector<RecoverySequence>& seq);

}  // namespace relaxlab

#endif  // RELAXLAB_RELAX_HPP
