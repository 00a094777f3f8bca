#include "relaxlab/witness.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "relaxlab/errors.hpp"

namespace relaxlab {

const char* to_string(DomainId id) {
  switch (id) {
    case DomainId::UnitInterval:
      return "unit_interval";
    case DomainId::UnitSquare:
      return "unit_square";
    case DomainId::Diamond:
      return "diamond";
    case DomainId::UnitCube:
      return "unit_cube";
    case DomainId::Octahedron:
      return "octahedron";
  }
  return "?";
}

namespace {

// Edge matrix [v1-v0, ..., vd-v0] padded with identity columns beyond dim.
Mat3 edge_matrix(int dim, const std::vector<Vec3>& verts) {
  Mat3 e = Mat3::identity();
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < 3; ++i) e(i, j) = (i < dim) ? verts[j + 1][i] - verts[0][i] : 0.0;
  for (int j = 0; j < dim; ++j)
    for (int i = dim; i < 3; ++i) e(i, j) = 0.0;
  return e;
}

double factorial(int d) { return d == 1 ? 1.0 : d == 2 ? 2.0 : 6.0; }

std::vector<Vec3> cell_vertices(const DomainPartition& p, std::size_t c) {
  std::vector<Vec3> out;
  out.reserve(p.cells[c].size());
  for (int v : p.cells[c]) out.push_back(p.vertices[v]);
  return out;
}

}  // namespace

double simplex_volume(int dim, const std::vector<Vec3>& verts) {
  return std::abs(det(edge_matrix(dim, verts))) / factorial(dim);
}

DeformationGradient simplex_gradient(int dim, const std::vector<Vec3>& verts, const std::vector<Vec3>& values) {
  const Mat3 e = edge_matrix(dim, verts);
  Mat3 f{};
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < 3; ++i) f(i, j) = values[j + 1][i] - values[0][i];
  const Mat3 g = f * inverse(e);
  Mat3 padded{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < dim; ++j) padded(i, j) = g(i, j);
  return DeformationGradient(dim, padded);
}

double DomainPartition::cell_volume(std::size_t c) const { return simplex_volume(dim, cell_vertices(*this, c)); }

double DomainPartition::total_cell_volume() const {
  double v = 0.0;
  for (std::size_t c = 0; c < cells.size(); ++c) v += cell_volume(c);
  return v;
}

double DomainPartition::domain_volume() const {
  switch (domain) {
    case DomainId::Diamond:
      return 2.0;
    case DomainId::Octahedron:
      return 4.0 / (3.0 * std::abs(slope));
    default:
      return 1.0;
  }
}

PiecewiseAffineWitness::PiecewiseAffineWitness(DomainPartition partition, std::vector<Vec3> nodal_values)
    : partition_(std::move(partition)), values_(std::move(nodal_values)) {
  if (values_.size() != partition_.vertices.size())
    throw InvalidArgument("witness: one nodal value per vertex required");
  const int d = partition_.dim;
  gradients_.reserve(partition_.cells.size());
  offsets_.reserve(partition_.cells.size());
  for (std::size_t c = 0; c < partition_.cells.size(); ++c) {
    const auto verts = cell_vertices(partition_, c);
    std::vector<Vec3> vals;
    for (int v : partition_.cells[c]) vals.push_back(values_[v]);
    DeformationGradient g = simplex_gradient(d, verts, vals);
    offsets_.push_back(vals[0] - g.padded() * verts[0]);
    gradients_.push_back(std::move(g));
  }
}

Vec3 PiecewiseAffineWitness::base_point_value() const {
  for (std::size_t v = 0; v < values_.size(); ++v)
    if (!partition_.on_boundary[v]) return values_[v];
  return kZero3;
}

Vec3 PiecewiseAffineWitness::eval(const Vec3& x) const {
  const int d = partition_.dim;
  constexpr double kTol = 1e-12;
  for (std::size_t c = 0; c < partition_.cells.size(); ++c) {
    const auto verts = cell_vertices(partition_, c);
    const Mat3 inv = inverse(edge_matrix(d, verts));
    Vec3 rel = x - verts[0];
    for (int i = d; i < 3; ++i) rel[i] = 0.0;
    const Vec3 lam = inv * rel;
    double sum = 0.0;
    bool inside = true;
    for (int i = 0; i < d; ++i) {
      if (lam[i] < -kTol) inside = false;
      sum += lam[i];
    }
    if (inside && sum <= 1.0 + kTol) {
      Vec3 xp = x;
      for (int i = d; i < 3; ++i) xp[i] = 0.0;
      return gradients_[c].padded() * xp + offsets_[c];
    }
  }
  return kZero3;
}

double PiecewiseAffineWitness::sup_norm() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, norm(v));
  return m;
}

double PiecewiseAffineWitness::max_gradient_norm() const {
  double m = 0.0;
  for (const auto& g : gradients_) m = std::max(m, g.norm());
  return m;
}

WitnessCheck check_witness(const PiecewiseAffineWitness& w, double continuity_tol, double volume_tol) {
  WitnessCheck r;
  const auto& p = w.partition();
  for (std::size_t c = 0; c < p.cells.size(); ++c) {
    for (int v : p.cells[c]) {
      const Vec3 diff = w.gradient(c).padded() * p.vertices[v] + w.offset(c) - w.nodal_values()[v];
      r.continuity_error = std::max(r.continuity_error, norm(diff));
    }
  }
  for (std::size_t v = 0; v < p.vertices.size(); ++v)
    if (p.on_boundary[v]) r.boundary_error = std::max(r.boundary_error, norm(w.nodal_values()[v]));
  const double dv = p.domain_volume();
  r.volume_error = std::abs(p.total_cell_volume() - dv) / dv;
  r.ok = r.continuity_error <= continuity_tol && r.boundary_error == 0.0 && r.volume_error <= volume_tol;
  if (!r.ok) {
    std::ostringstream os;
    os << "continuity " << r.continuity_error << ", boundary " << r.boundary_error << ", volume "
       << r.volume_error;
    r.message = os.str();
  }
  return r;
}

double witness_energy(const StoredEnergySpec& spec, const DeformationGradient& xi, const PiecewiseAffineWitness& w) {
  const auto& p = w.partition();
  if (xi.cols() != p.dim) throw DimensionMismatch("witness_energy: xi columns differ from the partition dimension");
  double total = 0.0;
  for (std::size_t c = 0; c < w.cell_count(); ++c) {
    const double e = eval_W(spec, xi + w.gradient(c));
    if (e == kInfinity) return kInfinity;
    total += p.cell_volume(c) * e;
  }
  return total / p.domain_volume();
}

}  // namespace relaxlab
