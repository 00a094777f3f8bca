#ifndef RELAXLAB_ENVELOPE_HPP
#define RELAXLAB_ENVELOPE_HPP

// Upper estimates of ZW by optimisation over mesh functions vanishing on the
// boundary of the unit cube, and the 1D convex envelope W**.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "relaxlab/energy.hpp"
#include "relaxlab/mesh.hpp"
#include "relaxlab/witness.hpp"

namespace relaxlab {

// ---- Mesh optimiser ------------------------------------------------------

/// Energy density evaluated on a padded 3x3 matrix whose first N columns
/// hold the argument.
using CellIntegrand = std::function<double(const Mat3&)>;

/// Fast W for the padded representation; agrees with eval_W.
CellIntegrand model_integrand(const StoredEnergySpec& spec);

struct DescentOptions {
  int max_sweeps = 200;
  double rel_tol = 1e-9;
  std::uint64_t seed = 0;
};

struct DescentResult {
  std::vector<Vec3> values;
  double value = kInfinity;           // sum of cell volume * density, +inf if any cell is infinite
  std::size_t infinite_cells = 0;
  int sweeps = 0;
};

/// Minimises sum_c |c| f(xi + grad phi_c) over interior nodal values by
/// seeded coordinate descent with a three-point parabolic line search.
/// Energies compare lexicographically as (infinite cell count, finite sum).
DescentResult coordinate_descent(const MeshSpace& mesh, const DeformationGradient& xi, const CellIntegrand& f,
                                 std::vector<Vec3> start, const DescentOptions& opt);

/// (infinite cell count, finite sum, total) of a nodal field.
DescentResult mesh_energy(const MeshSpace& mesh, const DeformationGradient& xi, const CellIntegrand& f,
                          const std::vector<Vec3>& values);

// ---- Z estimate ----------------------------------------------------------

enum class EstimateMethod { Construction, MeshOpt, Biconjugate, Zero };
enum class EstimateStatus { Ok, NonFiniteStart };

const char* to_string(EstimateMethod m);
const char* to_string(EstimateStatus s);

struct EnvelopeEstimate {
  double value = kInfinity;
  PiecewiseAffineWitness witness;
  EstimateMethod method = EstimateMethod::MeshOpt;
  EstimateStatus status = EstimateStatus::Ok;
  int level = 0;
  std::string spec_hash;
  std::uint64_t seed = 0;
  int sweeps = 0;
  std::string start;  // label of the winning warm start
};

/// Cascadic estimates at levels 0..level; entry L is the level-L estimate.
/// Warm starts per level: the previous level's best, phi = 0, the applicable
/// construction placed in the cube, and `restarts` random perturbations.
std::vector<EnvelopeEstimate> z_estimate_levels(const StoredEnergySpec& spec, const DeformationGradient& xi,
                                                int level, int restarts, std::uint64_t seed);

/// The finest entry of z_estimate_levels.
EnvelopeEstimate z_estimate(const StoredEnergySpec& spec, const DeformationGradient& xi, int level, int restarts,
                            std::uint64_t seed);

/// Nodal field of the construction warm start on `mesh`, if one applies.
std::optional<std::vector<Vec3>> construction_start(const StoredEnergySpec& spec, const DeformationGradient& xi,
                                                    const MeshSpace& mesh);

// ---- 1D biconjugate ------------------------------------------------------

struct BiconjugateOptions {
  std::size_t radii = 2048;
  double r_max = 10.0;
};

struct HullBridge {
  double a = 0.0, b = 0.0;    // signed tangent radii, a < b
  double wa = 0.0, wb = 0.0;  // w at the tangent points
};

struct RadialEnvelope1D {
  StoredEnergySpec spec;
  std::vector<double> grid;          // 0 = r_0 < ... < r_K
  std::vector<double> w;             // w(r_k), possibly +inf
  std::vector<double> values;        // W** at the grid radii
  std::vector<double> breakpoints;   // radii >= 0 where the hull touches w
  std::vector<HullBridge> bridges;   // maximal segments where W** < w

  /// W** at radius r >= 0.
  double at(double r) const;
  /// W**(xi) = at(|xi|).
  double operator()(const DeformationGradient& xi) const { return at(xi.norm()); }
};

/// Radial profile w(r) = r^p + h(r) of a 1D spec.
double radial_w(const StoredEnergySpec& spec, double r);

RadialEnvelope1D biconjugate_radial(const StoredEnergySpec& spec, const BiconjugateOptions& opt = {});

/// Largest W**(midpoint) excess over chord averages of consecutive grid triples
/// (<= 0 up to rounding for a convex hull), and the largest W** - w.
struct ConvexityReport {
  double max_three_point_violation = 0.0;
  double max_excess_over_w = 0.0;
  double max_breakpoint_gap = 0.0;
};
ConvexityReport check_biconjugate(const RadialEnvelope1D& env);

/// Brute-force min over grid pairs of the convex combination reaching r.
double two_point_oracle(const StoredEnergySpec& spec, double r, std::size_t samples = 4001, double r_max = 10.0);

// ---- Hierarchy and rank-one probe ---------------------------------------

struct HierarchyRow {
  int level = 0;
  double z_value = kInfinity;
  double biconjugate = 0.0;
  double gap = kInfinity;
};

struct HierarchyReport {
  std::vector<HierarchyRow> rows;
  bool monotone = true;
  double final_gap = kInfinity;
};

/// Checks W** <= Z estimate with nonincreasing gaps over levels 0..level.
/// Throws HierarchyViolated with the offending pair.
HierarchyReport hierarchy_check(const StoredEnergySpec& spec, const DeformationGradient& xi, int level,
                                int restarts = 2, std::uint64_t seed = 0);

struct ProbeReport {
  std::vector<std::pair<double, double>> samples;  // (t, value)
  double max_violation = 0.0;
  double at_t = 0.0;
  bool flagged = false;  // violation above the supplied artifact tolerance
};

/// Convexity violation max(0, v_mid - chord) over consecutive triples.
ProbeReport convexity_violation(std::vector<std::pair<double, double>> samples, double tolerance = 0.0);

/// Evaluates the estimator along xi + t eta. Throws PreconditionFailed
/// unless rank(eta) = 1.
ProbeReport quasiconvexity_probe(const std::function<double(const DeformationGradient&)>& estimator,
                                 const DeformationGradient& xi, const DeformationGradient& eta,
                                 const std::vector<double>& t_grid, double tolerance = 0.0);

// ---- Small-ball diagnostic ----------------------------------------------

struct SmallBallEstimate {
  double value = 0.0;  // max over the finite estimates
  DeformationGradient worst;
  std::size_t evaluated = 0;
  std::size_t non_finite = 0;  // grid points whose mesh estimate is +inf
};

/// max of z_estimate over diagonal xi with entries in {-1, -0.75, ..., 1};
/// entries enter only through their sorted moduli. Cached per spec hash and
/// level; concurrent callers wait for the first computation.
///
/// A simplex with a face on the cube boundary has a gradient of the form
/// xi + a (x) n, so for blow-up profiles the mesh estimate is +inf whenever
/// n . cof(xi) a vanishes for every a, e.g. for xi of rank at most N - 2.
SmallBallEstimate small_ball_estimate(const StoredEnergySpec& spec, int level = 2);

}  // namespace relaxlab

#endif  // RELAXLAB_ENVELOPE_HPP
