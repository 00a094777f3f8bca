#ifndef RELAXLAB_WITNESS_HPP
#define RELAXLAB_WITNESS_HPP

// Simplicial partitions of reference domains and continuous piecewise-affine
// maps phi : D -> R^3 vanishing on the boundary.

#include <string>
#include <vector>

#include "relaxlab/energy.hpp"
#include "relaxlab/tensor.hpp"

namespace relaxlab {

enum class DomainId { UnitInterval, UnitSquare, Diamond, UnitCube, Octahedron };

const char* to_string(DomainId id);

struct DomainPartition {
  int dim = 1;
  DomainId domain = DomainId::UnitInterval;
  /// Slope s of an octahedral domain; unused otherwise.
  double slope = 0.0;
  /// Vertex coordinates; entries beyond dim are zero.
  std::vector<Vec3> vertices;
  std::vector<char> on_boundary;
  /// Each cell lists dim + 1 vertex indices.
  std::vector<std::vector<int>> cells;

  double cell_volume(std::size_t c) const;
  double total_cell_volume() const;
  /// Exact volume of the reference domain.
  double domain_volume() const;
};

class PiecewiseAffineWitness {
 public:
  PiecewiseAffineWitness() = default;
  /// Builds cell gradients and offsets from nodal values.
  PiecewiseAffineWitness(DomainPartition partition, std::vector<Vec3> nodal_values);

  const DomainPartition& partition() const { return partition_; }
  const std::vector<Vec3>& nodal_values() const { return values_; }
  const DeformationGradient& gradient(std::size_t c) const { return gradients_[c]; }
  const std::vector<DeformationGradient>& gradients() const { return gradients_; }
  const Vec3& offset(std::size_t c) const { return offsets_[c]; }
  std::size_t cell_count() const { return gradients_.size(); }

  /// The value at the first interior vertex (the anchor of the constructions).
  Vec3 base_point_value() const;

  /// phi(x); zero outside the domain.
  Vec3 eval(const Vec3& x) const;
  /// max over vertices of |phi|.
  double sup_norm() const;
  /// max over cells of |grad phi| (Frobenius).
  double max_gradient_norm() const;

 private:
  DomainPartition partition_;
  std::vector<Vec3> values_;
  std::vector<DeformationGradient> gradients_;
  std::vector<Vec3> offsets_;
};

struct WitnessCheck {
  double continuity_error = 0.0;  // max |G_c v + b_c - phi(v)| over cell vertices
  double boundary_error = 0.0;    // max |phi(v)| over boundary vertices
  double volume_error = 0.0;      // |sum of cell volumes - |D|| / |D|
  bool ok = false;
  std::string message;
};

WitnessCheck check_witness(const PiecewiseAffineWitness& w, double continuity_tol = 1e-10,
                           double volume_tol = 1e-12);

/// (1/|D|) sum_c |cell_c| W(xi + grad phi_c).
double witness_energy(const StoredEnergySpec& spec, const DeformationGradient& xi,
                      const PiecewiseAffineWitness& w);

/// Gradient of the affine interpolant of `values` on the simplex `verts`.
DeformationGradient simplex_gradient(int dim, const std::vector<Vec3>& verts, const std::vector<Vec3>& values);

/// Volume of a simplex in R^dim.
double simplex_volume(int dim, const std::vector<Vec3>& verts);

}  // namespace relaxlab

#endif  // RELAXLAB_WITNESS_HPP
