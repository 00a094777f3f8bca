#include "relaxlab/envelope.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <mutex>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "relaxlab/constructions.hpp"
#include "relaxlab/errors.hpp"
#include "relaxlab/parallel.hpp"
#include "relaxlab/random.hpp"

namespace relaxlab {

CellIntegrand model_integrand(const StoredEnergySpec& spec) {
  return [spec](const Mat3& m) {
    double g;
    switch (spec.N) {
      case 1:
        g = frobenius(m);
        break;
      case 2:
        g = norm(cross(m.col(0), m.col(1)));
        break;
      default:
        g = std::abs(det(m));
    }
    const double h = spec.profile(g);
    if (h == kInfinity) return kInfinity;
    return std::pow(frobenius(m), spec.p) + h;
  };
}

// ---------------------------------------------------------------------------
// Coordinate descent

namespace {

// Energies ordered by (number of infinite cells, sum over the finite ones).
struct Lex {
  std::size_t inf = 0;
  double sum = 0.0;
};

bool better(const Lex& a, const Lex& b) { return a.inf != b.inf ? a.inf < b.inf : a.sum < b.sum; }

struct Incidence {
  std::uint32_t cell;
  int local;
};

class Descent {
 public:
  Descent(const MeshSpace& mesh, const DeformationGradient& xi, const CellIntegrand& f, std::vector<Vec3> values)
      : mesh_(mesh), xi_(xi.padded()), f_(f), values_(std::move(values)) {
    incidence_.resize(mesh.node_count());
    for (std::size_t c = 0; c < mesh.cell_count(); ++c)
      for (int v = 0; v <= mesh.dim(); ++v) incidence_[mesh.cell_nodes(c)[v]].push_back({std::uint32_t(c), v});
    refresh();
  }

  void refresh() {
    grads_.resize(mesh_.cell_count());
    dens_.resize(mesh_.cell_count());
    for (std::size_t c = 0; c < mesh_.cell_count(); ++c) {
      grads_[c] = xi_ + mesh_.gradient(c, values_);
      dens_[c] = f_(grads_[c]);
    }
  }

  Lex total() const {
    Lex e;
    for (double d : dens_) {
      if (d == kInfinity)
        ++e.inf;
      else
        e.sum += d;
    }
    e.sum *= mesh_.cell_volume();
    return e;
  }

  // Local energy of the cells around `node` with component r shifted by t.
  Lex local(std::uint32_t node, int r, double t) const {
    Lex e;
    for (const auto& [c, v] : incidence_[node]) {
      double d;
      if (t == 0.0) {
        d = dens_[c];
      } else {
        Mat3 g = grads_[c];
        const Vec3& sg = mesh_.cell_shape_gradients(c)[v];
        for (int a = 0; a < mesh_.dim(); ++a) g(r, a) += t * sg[a];
        d = f_(g);
      }
      if (d == kInfinity)
        ++e.inf;
      else
        e.sum += d;
    }
    return e;
  }

  void apply(std::uint32_t node, int r, double t) {
    values_[node][r] += t;
    for (const auto& [c, v] : incidence_[node]) {
      const Vec3& sg = mesh_.cell_shape_gradients(c)[v];
      for (int a = 0; a < mesh_.dim(); ++a) grads_[c](r, a) += t * sg[a];
      dens_[c] = f_(grads_[c]);
    }
  }

  // Returns the accepted shift (0 when none improves).
  double line_search(std::uint32_t node, int r, double step) const {
    const Lex e0 = local(node, r, 0.0);
    const Lex ep = local(node, r, step), em = local(node, r, -step);
    if (!better(ep, e0) && !better(em, e0)) return 0.0;
    const double dir = better(em, ep) ? -1.0 : 1.0;
    double t0 = 0.0, t1 = dir * step;
    Lex f0 = e0, f1 = dir > 0 ? ep : em;
    double t2 = 2.0 * t1;
    Lex f2 = local(node, r, t2);
    for (int k = 0; k < 30 && better(f2, f1); ++k) {
      t0 = t1;
      f0 = f1;
      t1 = t2;
      f1 = f2;
      t2 = 2.0 * t1;
      f2 = local(node, r, t2);
    }
    double best_t = t1;
    Lex best = f1;
    if (f0.inf == f1.inf && f2.inf == f1.inf) {
      const double d01 = (f1.sum - f0.sum) / (t1 - t0), d12 = (f2.sum - f1.sum) / (t2 - t1);
      const double curv = (d12 - d01) / (t2 - t0);
      if (curv > 0.0) {
        const double lo = std::min(t0, t2), hi = std::max(t0, t2);
        // Vertex of the interpolating parabola: t1 - ((t1-t0)^2 (f1-f2) - (t1-t2)^2 (f1-f0)) / (2 D).
        const double num = (t1 - t0) * (t1 - t0) * (f1.sum - f2.sum) - (t1 - t2) * (t1 - t2) * (f1.sum - f0.sum);
        const double den = (t1 - t0) * (f1.sum - f2.sum) - (t1 - t2) * (f1.sum - f0.sum);
        const double tp = den != 0.0 ? t1 - 0.5 * num / den : t1;
        if (tp > lo && tp < hi && tp != t1) {
          const Lex fp = local(node, r, tp);
          if (better(fp, best)) {
            best = fp;
            best_t = tp;
          }
        }
      }
    }
    return best_t;
  }

  const std::vector<Vec3>& values() const { return values_; }

 private:
  const MeshSpace& mesh_;
  Mat3 xi_;
  const CellIntegrand& f_;
  std::vector<Vec3> values_;
  std::vector<std::vector<Incidence>> incidence_;
  std::vector<Mat3> grads_;
  std::vector<double> dens_;
};

void shuffle(std::vector<std::uint32_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = rng.next_u64() % i;
    std::swap(order[i - 1], order[j]);
  }
}

DescentResult to_result(const Lex& e, std::vector<Vec3> values, int sweeps) {
  DescentResult r;
  r.values = std::move(values);
  r.infinite_cells = e.inf;
  r.value = e.inf > 0 ? kInfinity : e.sum;
  r.sweeps = sweeps;
  return r;
}

}  // namespace

DescentResult mesh_energy(const MeshSpace& mesh, const DeformationGradient& xi, const CellIntegrand& f,
                          const std::vector<Vec3>& values) {
  if (values.size() != mesh.node_count()) throw DimensionMismatch("mesh_energy: wrong number of nodal values");
  Descent d(mesh, xi, f, values);
  return to_result(d.total(), values, 0);
}

DescentResult coordinate_descent(const MeshSpace& mesh, const DeformationGradient& xi, const CellIntegrand& f,
                                 std::vector<Vec3> start, const DescentOptions& opt) {
  if (start.size() != mesh.node_count()) throw DimensionMismatch("coordinate_descent: wrong number of nodal values");
  if (xi.cols() != mesh.dim()) throw DimensionMismatch("coordinate_descent: xi and mesh dimensions differ");
  Descent d(mesh, xi, f, std::move(start));
  std::vector<std::uint32_t> order = mesh.interior_nodes();
  const double h = mesh.spacing();
  const double scale = 1.0 + xi.norm();
  const double min_step = 1e-12 * h * scale;
  std::vector<std::array<double, 3>> step(mesh.node_count());
  for (auto& s : step) s.fill(0.25 * h * scale);

  Lex current = d.total();
  int sweeps = 0;
  Rng rng(opt.seed, 0x5eed);
  while (sweeps < opt.max_sweeps && !order.empty()) {
    ++sweeps;
    shuffle(order, rng);
    bool moved = false;
    bool steps_alive = false;
    for (std::uint32_t node : order) {
      for (int r = 0; r < 3; ++r) {
        double& s = step[node][r];
        const double t = d.line_search(node, r, s);
        if (t != 0.0) {
          d.apply(node, r, t);
          moved = true;
          s = std::clamp(std::abs(t), min_step, 4.0 * h * scale);
        } else {
          s = std::max(0.5 * s, min_step);
        }
        if (s > min_step) steps_alive = true;
      }
    }
    d.refresh();
    const Lex next = d.total();
    const bool inf_drop = next.inf < current.inf;
    const double gain = current.sum - next.sum;
    const Lex prev = current;
    current = next;
    if (!moved) {
      if (!steps_alive) break;
      continue;
    }
    if (!inf_drop && prev.inf == next.inf && gain < opt.rel_tol * (1.0 + std::abs(next.sum))) break;
  }
  return to_result(current, d.values(), sweeps);
}

// ---------------------------------------------------------------------------
// Z estimate

const char* to_string(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::Construction:
      return "construction";
    case EstimateMethod::MeshOpt:
      return "mesh_opt";
    case EstimateMethod::Biconjugate:
      return "biconjugate";
    case EstimateMethod::Zero:
      return "zero";
  }
  return "?";
}

const char* to_string(EstimateStatus s) { return s == EstimateStatus::Ok ? "ok" : "non_finite_start"; }

namespace {

std::vector<Vec3> sample_on_mesh(const MeshSpace& mesh, const std::function<Vec3(const Vec3&)>& phi) {
  std::vector<Vec3> out(mesh.node_count(), kZero3);
  for (std::uint32_t i : mesh.interior_nodes()) out[i] = phi(mesh.node(i));
  return out;
}

// Two-slope field realising the hull bridge that contains |xi|, shifted so
// that it vanishes at both ends of the interval.
std::optional<std::vector<Vec3>> hull_start(const StoredEnergySpec& spec, const DeformationGradient& xi,
                                            const MeshSpace& mesh) {
  if (spec.N != 1 || mesh.divisions() < 2) return std::nullopt;
  const RadialEnvelope1D env = biconjugate_radial(spec);
  const Vec3 x = xi.col(0);
  const double r = norm(x);
  const Vec3 dir = r > 0.0 ? (1.0 / r) * x : unit_vector(0);
  for (const auto& br : env.bridges) {
    if (!(br.a <= r && r <= br.b)) continue;
    const double theta = (r - br.a) / (br.b - br.a);  // fraction at slope b
    const int n = mesh.divisions();
    const int kb = static_cast<int>(std::lround(theta * n));
    std::vector<Vec3> u(mesh.node_count(), kZero3);
    // Alternate the two slopes so the field stays close to the affine map.
    int used_b = 0;
    Vec3 acc = kZero3;
    for (int i = 0; i < n; ++i) {
      const bool take_b = static_cast<double>(used_b) < static_cast<double>(kb) * (i + 1) / n - 1e-12 && used_b < kb;
      const double slope = take_b ? br.b : br.a;
      if (take_b) ++used_b;
      acc = acc + (slope / n) * dir;
      u[static_cast<std::size_t>(i) + 1] = acc;
    }
    // phi = u - x * t with the end mismatch spread linearly.
    const Vec3 end = u[static_cast<std::size_t>(n)];
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      u[static_cast<std::size_t>(i)] = u[static_cast<std::size_t>(i)] - t * end;
    }
    u.front() = kZero3;
    u.back() = kZero3;
    return u;
  }
  return std::nullopt;
}

struct Start {
  std::string label;
  std::vector<Vec3> values;
};

}  // namespace

std::optional<std::vector<Vec3>> construction_start(const StoredEnergySpec& spec, const DeformationGradient& xi,
                                                    const MeshSpace& mesh) {
  if (mesh.interior_count() == 0) return std::nullopt;
  try {
    switch (spec.N) {
      case 1: {
        const Construction c = laminate_1d(spec, xi, 1.0);
        return sample_on_mesh(mesh, [&](const Vec3& x) { return c.witness.eval(x); });
      }
      case 2: {
        const Construction c = square_split_2d(spec, xi, 1.0);
        return sample_on_mesh(mesh, [&](const Vec3& x) { return c.witness.eval(x); });
      }
      default: {
        if (std::abs(det3(xi)) > det_tolerance(xi)) return std::nullopt;
        const PiecewiseAffineWitness w = rank_cascade_witness(xi);
        const double eps = 0.5 * std::min(1.0, std::abs(w.partition().slope));
        const Vec3 c{0.5, 0.5, 0.5};
        return sample_on_mesh(mesh, [&](const Vec3& x) { return eps * w.eval((1.0 / eps) * (x - c)); });
      }
    }
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<EnvelopeEstimate> z_estimate_levels(const StoredEnergySpec& spec, const DeformationGradient& xi,
                                                int level, int restarts, std::uint64_t seed) {
  spec.validate();
  if (xi.cols() != spec.N) throw DimensionMismatch("z_estimate: xi and spec dimensions differ");
  if (level < 0) throw InvalidArgument("z_estimate: level must be >= 0");
  if (level > MeshSpace::kMaxLevel) throw ResourceGuard("z_estimate: level " + std::to_string(level) + " exceeds 6");
  if (restarts < 0) throw InvalidArgument("z_estimate: restarts must be >= 0");
  if (!xi.all_finite()) throw InvalidArgument("z_estimate: xi must be finite");

  const CellIntegrand f = model_integrand(spec);
  const std::string hash = spec_hash(spec);
  std::vector<EnvelopeEstimate> out;
  std::optional<MeshSpace> prev_mesh;
  std::vector<Vec3> prev_best;
  bool prev_finite = false;

  for (int L = 0; L <= level; ++L) {
    MeshSpace mesh(spec.N, L);
    const std::uint64_t lseed = derive_seed(seed, static_cast<std::uint64_t>(L));
    std::vector<Start> starts;
    const std::vector<Vec3> zero(mesh.node_count(), kZero3);
    if (prev_mesh) starts.push_back({"prolongated", prev_mesh->prolongate(prev_best, mesh)});
    starts.push_back({"zero", zero});
    const auto cons = construction_start(spec, xi, mesh);
    if (cons) starts.push_back({"construction", *cons});
    if (auto hs = hull_start(spec, xi, mesh)) starts.push_back({"hull_sawtooth", std::move(*hs)});
    const std::vector<Vec3>& base = prev_mesh && prev_finite ? starts.front().values : zero;
    for (int k = 0; k < restarts && mesh.interior_count() > 0; ++k) {
      Rng rng(lseed, 1000 + static_cast<std::uint64_t>(k));
      const double amp = mesh.spacing() * (1.0 + xi.norm());
      std::vector<Vec3> v = base;
      for (std::uint32_t i : mesh.interior_nodes())
        for (int r = 0; r < 3; ++r) v[i][r] += amp * rng.uniform(-1.0, 1.0);
      starts.push_back({"random_" + std::to_string(k), std::move(v)});
    }

    DescentResult best;
    std::string best_label;
    int best_sweeps = 0;
    bool best_unchanged = true;
    bool first = true;
    for (std::size_t si = 0; si < starts.size(); ++si) {
      Start& st = starts[si];
      if (cons && mesh_energy(mesh, xi, f, st.values).infinite_cells > 0) {
        for (int k = 0; k <= 10; ++k) {
          std::vector<Vec3> v = st.values;
          const double w = std::pow(0.5, k);
          for (std::size_t i = 0; i < v.size(); ++i) v[i] = v[i] + w * (*cons)[i];
          if (mesh_energy(mesh, xi, f, v).infinite_cells == 0) {
            st.values = std::move(v);
            st.label += "+nudge" + std::to_string(k);
            break;
          }
        }
      }
      DescentOptions opt;
      opt.seed = derive_seed(lseed, si);
      DescentResult r = coordinate_descent(mesh, xi, f, st.values, opt);
      const bool unchanged = r.values == st.values;
      const bool wins = first || r.infinite_cells < best.infinite_cells ||
                        (r.infinite_cells == best.infinite_cells && r.value < best.value);
      if (wins) {
        best = std::move(r);
        best_label = st.label;
        best_sweeps = best.sweeps;
        best_unchanged = unchanged;
        first = false;
      }
    }

    EnvelopeEstimate est;
    est.level = L;
    est.spec_hash = hash;
    est.seed = seed;
    est.sweeps = best_sweeps;
    est.start = best_label;
    est.witness = mesh.to_witness(best.values);
    const bool all_zero =
        std::all_of(best.values.begin(), best.values.end(), [](const Vec3& v) { return v == kZero3; });
    if (best.infinite_cells > 0) {
      est.status = EstimateStatus::NonFiniteStart;
      est.value = kInfinity;
    } else {
      est.value = witness_energy(spec, xi, est.witness);
    }
    if (all_zero)
      est.method = EstimateMethod::Zero;
    else if (best_unchanged && best_label.rfind("construction", 0) == 0)
      est.method = EstimateMethod::Construction;
    else
      est.method = EstimateMethod::MeshOpt;
    out.push_back(std::move(est));
    prev_finite = best.infinite_cells == 0;
    prev_best = std::move(best.values);
    prev_mesh.emplace(std::move(mesh));
  }
  return out;
}

EnvelopeEstimate z_estimate(const StoredEnergySpec& spec, const DeformationGradient& xi, int level, int restarts,
                            std::uint64_t seed) {
  return std::move(z_estimate_levels(spec, xi, level, restarts, seed).back());
}

// ---------------------------------------------------------------------------
// 1D biconjugate

double radial_w(const StoredEnergySpec& spec, double r) {
  const double h = spec.profile(r);
  if (h == kInfinity) return kInfinity;
  return std::pow(r, spec.p) + h;
}

namespace {

std::vector<double> composite_grid(std::size_t count, double r_max) {
  // r_0 = 0, a log-spaced block on [1e-6, 1) and a linear block on [1, r_max].
  std::vector<double> g;
  g.reserve(count);
  g.push_back(0.0);
  const std::size_t rest = count - 1;
  const std::size_t n_log = rest / 2, n_lin = rest - n_log;
  const double lo = std::log(1e-6);
  const double top = std::min(1.0, r_max);
  for (std::size_t k = 0; k < n_log; ++k)
    g.push_back(std::exp(lo + (std::log(top) - lo) * static_cast<double>(k) / static_cast<double>(n_log)));
  for (std::size_t k = 0; k < n_lin; ++k) {
    const double t = n_lin == 1 ? 1.0 : static_cast<double>(k) / static_cast<double>(n_lin - 1);
    g.push_back(top + (r_max - top) * t);
  }
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

struct Pt {
  double x, y;
};

double cross_z(const Pt& o, const Pt& a, const Pt& b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

}  // namespace

double RadialEnvelope1D::at(double r) const {
  r = std::abs(r);
  for (const auto& br : bridges)
    if (br.a <= r && r <= br.b) return br.wa + (br.wb - br.wa) * (r - br.a) / (br.b - br.a);
  return radial_w(spec, r);
}

RadialEnvelope1D biconjugate_radial(const StoredEnergySpec& spec, const BiconjugateOptions& opt) {
  spec.validate();
  if (spec.N != 1) throw DimensionMismatch("biconjugate_radial: requires N = 1");
  if (opt.radii < 3 || !(opt.r_max > 0.0)) throw InvalidArgument("biconjugate_radial: bad grid options");
  RadialEnvelope1D env;
  env.spec = spec;
  env.grid = composite_grid(opt.radii, opt.r_max);
  env.w.resize(env.grid.size());
  for (std::size_t k = 0; k < env.grid.size(); ++k) env.w[k] = radial_w(spec, env.grid[k]);

  // Even extension, sorted by signed radius; +inf nodes dropped.
  std::vector<Pt> pts;
  for (std::size_t k = env.grid.size(); k-- > 1;)
    if (env.w[k] < kInfinity) pts.push_back({-env.grid[k], env.w[k]});
  for (std::size_t k = 0; k < env.grid.size(); ++k)
    if (env.w[k] < kInfinity) pts.push_back({env.grid[k], env.w[k]});
  std::vector<Pt> hull;
  for (const Pt& p : pts) {
    while (hull.size() >= 2 && cross_z(hull[hull.size() - 2], hull.back(), p) <= 0.0) hull.pop_back();
    hull.push_back(p);
  }

  auto we = [&](double x) { return radial_w(spec, std::abs(x)); };
  auto index_of = [&](double x) {
    return static_cast<std::size_t>(std::lower_bound(pts.begin(), pts.end(), x, [](const Pt& p, double v) {
                                      return p.x < v;
                                    }) - pts.begin());
  };
  for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
    const std::size_t ia = index_of(hull[e].x), ib = index_of(hull[e + 1].x);
    if (ib <= ia + 1) continue;
    if (hull[e + 1].x <= 0.0) continue;  // mirrored copy of a bridge on the positive side
    // Polish the common tangent: a maximises the slope to b, b minimises the slope from a.
    double a = hull[e].x, b = hull[e + 1].x;
    const double a_lo = pts[ia > 0 ? ia - 1 : 0].x, a_hi = pts[ia + 1].x;
    const double b_lo = pts[ib - 1].x, b_hi = pts[std::min(ib + 1, pts.size() - 1)].x;
    const int bits = std::numeric_limits<double>::digits / 2 + 4;
    const bool sym = std::abs(a + b) <= 1e-15 * std::max(1.0, std::abs(b));
    for (int it = 0; it < 60; ++it) {
      const double a_old = a, b_old = b;
      if (sym) {
        b = boost::math::tools::brent_find_minima([&](double x) { return we(x); }, b_lo, b_hi, bits).first;
        a = -b;
        break;
      }
      b = boost::math::tools::brent_find_minima([&](double x) { return (we(x) - we(a)) / (x - a); }, b_lo, b_hi,
                                                bits)
              .first;
      a = boost::math::tools::brent_find_minima([&](double x) { return -(we(b) - we(x)) / (b - x); }, a_lo, a_hi,
                                                bits)
              .first;
      if (std::abs(a - a_old) + std::abs(b - b_old) <= 1e-15 * (1.0 + std::abs(b))) break;
    }
    if (!std::isfinite(we(a)) || !std::isfinite(we(b))) {
      a = hull[e].x;
      b = hull[e + 1].x;
    }
    env.bridges.push_back({a, b, we(a), we(b)});
  }
  for (const Pt& p : hull)
    if (p.x >= 0.0) env.breakpoints.push_back(p.x);
  env.values.resize(env.grid.size());
  for (std::size_t k = 0; k < env.grid.size(); ++k) env.values[k] = env.at(env.grid[k]);
  return env;
}

ConvexityReport check_biconjugate(const RadialEnvelope1D& env) {
  ConvexityReport rep;
  // Signed samples -r_K..r_K.
  std::vector<std::pair<double, double>> s;
  for (std::size_t k = env.grid.size(); k-- > 1;) s.emplace_back(-env.grid[k], env.values[k]);
  for (std::size_t k = 0; k < env.grid.size(); ++k) s.emplace_back(env.grid[k], env.values[k]);
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const auto& [x0, y0] = s[k - 1];
    const auto& [x1, y1] = s[k];
    const auto& [x2, y2] = s[k + 1];
    const double chord = y0 + (y2 - y0) * (x1 - x0) / (x2 - x0);
    const double v = (y1 - chord) / (1.0 + std::abs(y1));
    rep.max_three_point_violation = std::max(rep.max_three_point_violation, v);
  }
  for (std::size_t k = 0; k < env.grid.size(); ++k)
    if (env.w[k] < kInfinity) rep.max_excess_over_w = std::max(rep.max_excess_over_w, env.values[k] - env.w[k]);
  for (double r : env.breakpoints)
    rep.max_breakpoint_gap = std::max(rep.max_breakpoint_gap, std::abs(env.at(r) - radial_w(env.spec, r)));
  return rep;
}

double two_point_oracle(const StoredEnergySpec& spec, double r, std::size_t samples, double r_max) {
  r = std::abs(r);
  std::vector<double> xs(samples), ws(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    xs[i] = -r_max + 2.0 * r_max * static_cast<double>(i) / static_cast<double>(samples - 1);
    ws[i] = radial_w(spec, std::abs(xs[i]));
  }
  double best = radial_w(spec, r);
  for (std::size_t i = 0; i < samples; ++i) {
    if (xs[i] > r || ws[i] == kInfinity) continue;
    for (std::size_t j = samples; j-- > 0;) {
      if (xs[j] <= r) break;
      if (ws[j] == kInfinity) continue;
      const double theta = (r - xs[i]) / (xs[j] - xs[i]);
      best = std::min(best, (1.0 - theta) * ws[i] + theta * ws[j]);
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Hierarchy and probes

HierarchyReport hierarchy_check(const StoredEnergySpec& spec, const DeformationGradient& xi, int level, int restarts,
                                std::uint64_t seed) {
  if (spec.N != 1) throw PreconditionFailed("hierarchy_check: requires N = 1");
  const RadialEnvelope1D env = biconjugate_radial(spec);
  const double bic = env(xi);
  HierarchyReport rep;
  const auto ests = z_estimate_levels(spec, xi, level, restarts, seed);
  for (const auto& e : ests) {
    HierarchyRow row{e.level, e.value, bic, e.value - bic};
    if (e.value < bic - 1e-9 * (1.0 + bic))
      throw HierarchyViolated("hierarchy_check: level " + std::to_string(e.level) + " estimate " +
                              std::to_string(e.value) + " is below W** = " + std::to_string(bic));
    if (!rep.rows.empty() && row.gap > rep.rows.back().gap + 1e-10) {
      rep.monotone = false;
      throw HierarchyViolated("hierarchy_check: gap grows from level " + std::to_string(rep.rows.back().level) +
                              " (" + std::to_string(rep.rows.back().gap) + ") to level " +
                              std::to_string(row.level) + " (" + std::to_string(row.gap) + ")");
    }
    rep.rows.push_back(row);
  }
  rep.final_gap = rep.rows.back().gap;
  return rep;
}

ProbeReport convexity_violation(std::vector<std::pair<double, double>> samples, double tolerance) {
  std::sort(samples.begin(), samples.end());
  ProbeReport rep;
  rep.samples = samples;
  for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
    const auto& [t0, v0] = samples[k - 1];
    const auto& [t1, v1] = samples[k];
    const auto& [t2, v2] = samples[k + 1];
    if (v0 == kInfinity || v2 == kInfinity) continue;
    const double chord = v0 + (v2 - v0) * (t1 - t0) / (t2 - t0);
    const double viol = std::max(0.0, v1 - chord);
    if (viol > rep.max_violation) {
      rep.max_violation = viol;
      rep.at_t = t1;
    }
  }
  rep.flagged = rep.max_violation > tolerance;
  return rep;
}

ProbeReport quasiconvexity_probe(const std::function<double(const DeformationGradient&)>& estimator,
                                 const DeformationGradient& xi, const DeformationGradient& eta,
                                 const std::vector<double>& t_grid, double tolerance) {
  if (xi.cols() != eta.cols()) throw DimensionMismatch("quasiconvexity_probe: xi and eta differ in shape");
  if (numeric_rank(eta) != 1) throw PreconditionFailed("quasiconvexity_probe: eta must have rank one");
  std::vector<std::pair<double, double>> samples;
  for (double t : t_grid) samples.emplace_back(t, estimator(xi + t * eta));
  return convexity_violation(std::move(samples), tolerance);
}

// ---------------------------------------------------------------------------
// Small-ball diagnostic

SmallBallEstimate small_ball_estimate(const StoredEnergySpec& spec, int level) {
  static std::mutex mu;
  static std::map<std::string, std::shared_future<SmallBallEstimate>> cache;
  const std::string key = spec_hash(spec) + "/" + std::to_string(level);
  std::promise<SmallBallEstimate> promise;
  std::shared_future<SmallBallEstimate> fut;
  bool owner = false;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) {
      fut = it->second;
    } else {
      fut = promise.get_future().share();
      cache.emplace(key, fut);
      owner = true;
    }
  }
  if (!owner) return fut.get();
  try {
    if (spec.N != 3) throw DimensionMismatch("small_ball_estimate: requires N = 3");
    const std::array<double, 5> vals{0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<Vec3> triples;
    for (std::size_t i = 0; i < vals.size(); ++i)
      for (std::size_t j = i; j < vals.size(); ++j)
        for (std::size_t k = j; k < vals.size(); ++k) triples.push_back({vals[k], vals[j], vals[i]});
    std::vector<double> values(triples.size());
    parallel_for(triples.size(), [&](std::size_t t) {
      const Vec3& d = triples[t];
      const DeformationGradient xi(3, Mat3::diag(d[0], d[1], d[2]));
      values[t] = z_estimate(spec, xi, level, 1, t).value;
    });
    SmallBallEstimate out;
    out.evaluated = triples.size();
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t t = 0; t < values.size(); ++t) {
      if (values[t] == kInfinity) {
        ++out.non_finite;
      } else if (values[t] > best) {
        best = values[t];
        arg = t;
      }
    }
    out.value = std::max(best, 0.0);
    out.worst = DeformationGradient(3, Mat3::diag(triples[arg][0], triples[arg][1], triples[arg][2]));
    promise.set_value(out);
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard<std::mutex> lock(mu);
    cache.erase(key);
  }
  return fut.get();
}

}  // namespace relaxlab
