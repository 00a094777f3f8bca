#ifndef RELAXLAB_MESH_HPP
#define RELAXLAB_MESH_HPP

// Dyadic simplicial meshes of the unit cube ]0,1[^N.
//
// Each subcube carries the N! Kuhn simplices along a main diagonal. The
// diagonal is reflected per octant of the cube so that it always ends at the
// subcube corner nearest the cube centre; every simplex therefore owns an
// interior node once level >= 1. Within an octant the reflected mesh is
// a plain Kuhn mesh, so level L+1 refines level L.

#include <array>
#include <cstdint>
#include <vector>

#include "relaxlab/tensor.hpp"
#include "relaxlab/witness.hpp"

namespace relaxlab {

class MeshSpace {
 public:
  static constexpr int kMaxLevel = 6;

  /// Throws ResourceGuard when level > kMaxLevel, InvalidArgument on bad dim.
  MeshSpace(int dim, int level);

  int dim() const { return dim_; }
  int level() const { return level_; }
  int divisions() const { return n_; }
  double spacing() const { return 1.0 / n_; }

  std::size_t node_count() const { return coords_.size(); }
  std::size_t cell_count() const { return cells_.size(); }
  std::size_t interior_count() const { return interior_.size(); }

  const Vec3& node(std::size_t i) const { return coords_[i]; }
  bool on_boundary(std::size_t i) const { return boundary_[i] != 0; }
  const std::vector<std::uint32_t>& interior_nodes() const { return interior_; }

  /// Vertex node indices of a cell (dim + 1 entries used).
  const std::array<std::uint32_t, 4>& cell_nodes(std::size_t c) const { return cells_[c]; }
  /// Gradients of the barycentric coordinates of the cell's vertices.
  const std::array<Vec3, 4>& cell_shape_gradients(std::size_t c) const { return shape_[c]; }
  const std::vector<std::uint32_t>& node_cells(std::size_t i) const { return node_cells_[i]; }
  double cell_volume() const { return cell_volume_; }

  /// Padded 3x3 gradient of the nodal field on cell c.
  Mat3 gradient(std::size_t c, const std::vector<Vec3>& values) const;

  /// Evaluates the piecewise-linear interpolant at x in [0,1]^dim.
  Vec3 interpolate(const std::vector<Vec3>& values, const Vec3& x) const;

  /// Nodal values of this mesh's interpolant resampled on a finer mesh.
  std::vector<Vec3> prolongate(const std::vector<Vec3>& values, const MeshSpace& finer) const;

  DomainPartition partition() const;
  PiecewiseAffineWitness to_witness(const std::vector<Vec3>& values) const;

 private:
  std::size_t node_index(const std::array<int, 3>& ijk) const;

  int dim_;
  int level_;
  int n_;
  double cell_volume_;
  std::vector<Vec3> coords_;
  std::vector<char> boundary_;
  std::vector<std::uint32_t> interior_;
  std::vector<std::array<std::uint32_t, 4>> cells_;
  std::vector<std::array<Vec3, 4>> shape_;
  std::vector<std::vector<std::uint32_t>> node_cells_;
};

}  // namespace relaxlab

#endif  // RELAXLAB_MESH_HPP
