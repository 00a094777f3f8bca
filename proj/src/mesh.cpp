#include "relaxlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "relaxlab/errors.hpp"

namespace relaxlab {

MeshSpace::MeshSpace(int dim, int level) : dim_(dim), level_(level) {
  if (dim < 1 || dim > 3) throw InvalidArgument("MeshSpace: dim must be 1, 2 or 3");
  if (level < 0) throw InvalidArgument("MeshSpace: level must be >= 0");
  if (level > kMaxLevel) throw ResourceGuard("MeshSpace: level " + std::to_string(level) + " exceeds 6");
  n_ = 1 << level;
  const double h = 1.0 / n_;
  cell_volume_ = std::pow(h, dim) / (dim == 1 ? 1.0 : dim == 2 ? 2.0 : 6.0);

  const int m = n_ + 1;
  const std::size_t nodes = dim == 1 ? m : dim == 2 ? std::size_t(m) * m : std::size_t(m) * m * m;
  coords_.resize(nodes);
  boundary_.resize(nodes);
  node_cells_.resize(nodes);
  for (std::size_t idx = 0; idx < nodes; ++idx) {
    std::size_t r = idx;
    Vec3 x = kZero3;
    bool bd = false;
    for (int a = 0; a < dim; ++a) {
      const int i = static_cast<int>(r % m);
      r /= m;
      x[a] = static_cast<double>(i) * h;
      if (i == 0 || i == n_) bd = true;
    }
    coords_[idx] = x;
    boundary_[idx] = bd ? 1 : 0;
    if (!bd) interior_.push_back(static_cast<std::uint32_t>(idx));
  }

  std::array<int, 3> perm0{0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  do {
    perms.push_back(perm0);
  } while (std::next_permutation(perm0.begin(), perm0.begin() + dim));

  std::array<int, 3> k{0, 0, 0};
  const int kmax1 = n_, kmax2 = dim >= 2 ? n_ : 1, kmax3 = dim >= 3 ? n_ : 1;
  for (k[2] = 0; k[2] < kmax3; ++k[2])
    for (k[1] = 0; k[1] < kmax2; ++k[1])
      for (k[0] = 0; k[0] < kmax1; ++k[0]) {
        std::array<int, 3> flip{0, 0, 0};
        for (int a = 0; a < dim; ++a) flip[a] = (2 * k[a] + 1 > n_) ? 1 : 0;
        for (const auto& pi : perms) {
          std::array<std::uint32_t, 4> cell{};
          std::array<int, 3> bits = flip;
          std::vector<Vec3> verts;
          for (int v = 0; v <= dim; ++v) {
            if (v > 0) bits[pi[v - 1]] ^= 1;
            std::array<int, 3> ijk{k[0] + bits[0], k[1] + bits[1], k[2] + bits[2]};
            for (int a = dim; a < 3; ++a) ijk[a] = 0;
            cell[v] = static_cast<std::uint32_t>(node_index(ijk));
            verts.push_back(coords_[cell[v]]);
          }
          Mat3 e = Mat3::identity();
          for (int j = 0; j < dim; ++j)
            for (int i = 0; i < 3; ++i) e(i, j) = i < dim ? verts[j + 1][i] - verts[0][i] : 0.0;
          const Mat3 inv = inverse(e);
          std::array<Vec3, 4> sg{};
          for (int j = 1; j <= dim; ++j)
            for (int a = 0; a < dim; ++a) sg[j][a] = inv(j - 1, a);
          for (int a = 0; a < dim; ++a) {
            double s = 0.0;
            for (int j = 1; j <= dim; ++j) s += sg[j][a];
            sg[0][a] = -s;
          }
          const auto c = static_cast<std::uint32_t>(cells_.size());
          cells_.push_back(cell);
          shape_.push_back(sg);
          for (int v = 0; v <= dim; ++v) node_cells_[cell[v]].push_back(c);
        }
      }
}

std::size_t MeshSpace::node_index(const std::array<int, 3>& ijk) const {
  const std::size_t m = static_cast<std::size_t>(n_) + 1;
  return static_cast<std::size_t>(ijk[0]) + m * (static_cast<std::size_t>(ijk[1]) + m * static_cast<std::size_t>(ijk[2]));
}

Mat3 MeshSpace::gradient(std::size_t c, const std::vector<Vec3>& values) const {
  Mat3 g{};
  const auto& nodes = cells_[c];
  const auto& sg = shape_[c];
  for (int v = 0; v <= dim_; ++v) {
    const Vec3& u = values[nodes[v]];
    for (int r = 0; r < 3; ++r)
      for (int a = 0; a < dim_; ++a) g(r, a) += u[r] * sg[v][a];
  }
  return g;
}

Vec3 MeshSpace::interpolate(const std::vector<Vec3>& values, const Vec3& x) const {
  std::array<int, 3> k{0, 0, 0};
  std::array<double, 3> y{0, 0, 0};
  std::array<int, 3> flip{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    const double t = std::clamp(x[a], 0.0, 1.0) * n_;
    k[a] = std::min(static_cast<int>(std::floor(t)), n_ - 1);
    flip[a] = (2 * k[a] + 1 > n_) ? 1 : 0;
    const double local = t - k[a];
    y[a] = flip[a] ? 1.0 - local : local;
  }
  std::array<int, 3> pi{0, 1, 2};
  std::stable_sort(pi.begin(), pi.begin() + dim_, [&](int a, int b) { return y[a] > y[b]; });
  Vec3 out = kZero3;
  std::array<int, 3> bits = flip;
  for (int v = 0; v <= dim_; ++v) {
    if (v > 0) bits[pi[v - 1]] ^= 1;
    double lam;
    if (v == 0)
      lam = 1.0 - y[pi[0]];
    else if (v == dim_)
      lam = y[pi[dim_ - 1]];
    else
      lam = y[pi[v - 1]] - y[pi[v]];
    std::array<int, 3> ijk{k[0] + bits[0], k[1] + bits[1], k[2] + bits[2]};
    for (int a = dim_; a < 3; ++a) ijk[a] = 0;
    out = out + lam * values[node_index(ijk)];
  }
  return out;
}

std::vector<Vec3> MeshSpace::prolongate(const std::vector<Vec3>& values, const MeshSpace& finer) const {
  if (finer.dim_ != dim_) throw DimensionMismatch("prolongate: dimension differs");
  std::vector<Vec3> out(finer.node_count(), kZero3);
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!finer.on_boundary(i)) out[i] = interpolate(values, finer.node(i));
  return out;
}

DomainPartition MeshSpace::partition() const {
  DomainPartition p;
  p.dim = dim_;
  p.domain = dim_ == 1 ? DomainId::UnitInterval : dim_ == 2 ? DomainId::UnitSquare : DomainId::UnitCube;
  p.vertices = coords_;
  p.on_boundary = boundary_;
  p.cells.reserve(cells_.size());
  for (const auto& c : cells_) p.cells.emplace_back(c.begin(), c.begin() + dim_ + 1);
  return p;
}

PiecewiseAffineWitness MeshSpace::to_witness(const std::vector<Vec3>& values) const {
  return PiecewiseAffineWitness(partition(), values);
}

}  // namespace relaxlab
