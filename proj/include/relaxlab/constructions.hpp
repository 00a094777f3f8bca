#ifndef RELAXLAB_CONSTRUCTIONS_HPP
#define RELAXLAB_CONSTRUCTIONS_HPP

// Explicit piecewise-affine witnesses for upper bounds on ZW, one per growth
// argument, each paired with the closed-form constant it certifies.

#include <array>
#include <string>
#include <vector>

#include "relaxlab/energy.hpp"
#include "relaxlab/witness.hpp"

namespace relaxlab {

/// witness_energy is an achievable average of W (hence >= ZW(xi)).
/// formula_bound is constant * (1 + |xi|^p) for the closed-form constants,
/// or the constant-weighted cell average for the determinant-margin routes.
struct CertifiedBound {
  DeformationGradient xi;
  double witness_energy = kInfinity;
  double formula_bound = kInfinity;
  double constant = 0.0;
  std::string constant_name;
  std::string route;
  double det_margin = 0.0;
  std::vector<CertifiedBound> children;

  /// witness_energy <= formula_bound up to a relative rounding slack of 1e-9.
  bool holds() const;
  /// holds() for this node and every descendant.
  bool holds_recursively() const;
  std::size_t depth() const;
};

struct Construction {
  PiecewiseAffineWitness witness;
  CertifiedBound bound;
};

inline constexpr double kBoundSlack = 1e-9;

// ---- N = 1 ---------------------------------------------------------------

/// Two-slope laminate with |nu| = 2 alpha when |xi| <= alpha; identity
/// witness with constant beta otherwise.
Construction laminate_1d(const StoredEnergySpec& spec, const DeformationGradient& xi, double alpha);

// ---- N = 2 ---------------------------------------------------------------

/// Four-triangle witness on the diamond |x1| + |x2| < 1, gamma = beta 2^(2p+1).
/// Throws PreconditionFailed unless min(|xi1 + xi2|, |xi1 - xi2|) >= alpha.
Construction diamond_2d(const StoredEnergySpec& spec, const DeformationGradient& xi, double alpha);

/// Diagonal split of the unit square with |nu| = alpha; each child goes
/// through diamond_2d. Total in xi.
Construction square_split_2d(const StoredEnergySpec& spec, const DeformationGradient& xi, double alpha);

/// beta 2^(2p+1), with beta the C2 constant at alpha.
double diamond_gamma(const StoredEnergySpec& spec, double alpha);

// ---- N = 3 ---------------------------------------------------------------

/// Eight cells with apexes at +-e1, +-e2, +-e3/s. Throws ZeroSlope for s = 0.
DomainPartition octahedron_partition(double s);

/// Cell sign patterns (sigma1, sigma2, sigma3) in cell order.
const std::array<std::array<int, 3>, 8>& octahedron_signs();

/// The witness equal to nu at the origin, zero on the boundary:
/// on cell i, grad phi = -(sigma1 nu | sigma2 nu | s sigma3 nu).
PiecewiseAffineWitness octahedron_witness(double s, const Vec3& nu);

struct OctaWitness {
  PiecewiseAffineWitness witness;
  double lambda = 0.0, mu = 0.0, s = 0.0;
  Vec3 nu{};
  std::array<double, 8> det_abs{};       // |det(xi + grad phi)| per cell
  std::array<double, 8> det_expected{};  // |s +- (lambda +- mu)| per cell
  double delta = 0.0;                    // min of the four expected values
};

/// |s -+ (lambda +- mu)| for each octahedral cell.
std::array<double, 8> octa_det_table(double lambda, double mu, double s);

/// Rank-2 witness with xi3 = lambda xi1 + mu xi2 and nu = xi1^xi2 / |xi1^xi2|^2.
/// Throws ForbiddenSlope when s is in {0, +-(lambda - mu), +-(lambda + mu)}
/// and SingularInput when xi1 ^ xi2 = 0.
OctaWitness octa_witness_3d(const StoredEnergySpec& spec, const DeformationGradient& xi, double lambda,
                            double mu, double s);

/// Margin-maximising slope from {1, 2, 3, 1+|l|+|m|, 2(1+|l|+|m|)} against
/// {0, +-(l - m), +-(l + m)}; ties go to the earlier candidate.
double choose_slope(double lambda, double mu);

/// det_tol(xi) = 1e-8 (1 + |xi|^3).
double det_tolerance(const DeformationGradient& xi);

/// Rank cascade for |det xi| <= det_tol.
CertifiedBound rank_deficient_bound_3d(const StoredEnergySpec& spec, const DeformationGradient& xi);

/// The first-level octahedral witness of the rank cascade, expressed in the
/// original column order (apex axes permuted accordingly).
PiecewiseAffineWitness rank_cascade_witness(const DeformationGradient& xi);

struct DiagonalConstants {
  double p = 2.0;
  double c1 = 1.0;  // C3 constant at delta = 1
  double c2 = 0.0;  // c1 2^p (1 + (2 sqrt 3)^p)
  double c3 = 0.0;  // 2^(2p) max{c1, c2}
  double c0 = 0.0;  // small-ball constant, c3 (1 + (1 + 2 sqrt 3)^p)
  double c = 0.0;   // max{c0, c2, c3}
};

DiagonalConstants diagonal_constants(const StoredEnergySpec& spec);

/// Case analysis for diagonal xi. Throws NotDiagonal.
CertifiedBound diagonal_bound_3d(const StoredEnergySpec& spec, const DeformationGradient& xi);

/// Polar and spectral reduction to a diagonal matrix, then diagonal_bound_3d.
/// Throws SingularInput when |det xi| <= det_tol.
CertifiedBound so3_reduce_bound(const StoredEnergySpec& spec, const DeformationGradient& xi);

/// Routes xi by dimension: laminate (N=1), square split (N=2), or
/// so3_reduce / rank cascade (N=3).
CertifiedBound certified_bound(const StoredEnergySpec& spec, const DeformationGradient& xi, double alpha);

}  // namespace relaxlab

#endif  // RELAXLAB_CONSTRUCTIONS_HPP
