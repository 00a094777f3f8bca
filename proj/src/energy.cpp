#include "relaxlab/energy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "relaxlab/errors.hpp"
#include "relaxlab/parallel.hpp"
#include "relaxlab/random.hpp"

namespace relaxlab {

SingularProfile SingularProfile::inverse_power(double s, double scale) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("inverse_power: s must be positive");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidArgument("inverse_power: scale must be positive");
  SingularProfile h;
  h.kind_ = ProfileKind::InversePower;
  h.s_ = s;
  h.scale_ = scale;
  return h;
}

SingularProfile SingularProfile::table(std::vector<std::pair<double, double>> nodes) {
  if (nodes.empty()) throw InvalidArgument("table profile: no nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto [t, v] = nodes[i];
    if (!std::isfinite(t) || t < 0.0) throw InvalidArgument("table profile: t must be finite and >= 0");
    if (!std::isfinite(v) || v < 0.0) throw InvalidArgument("table profile: h must be finite and >= 0");
    if (i > 0 && !(t > nodes[i - 1].first)) throw InvalidArgument("table profile: t must be strictly increasing");
  }
  SingularProfile h;
  h.kind_ = ProfileKind::Table;
  h.nodes_ = std::move(nodes);
  return h;
}

SingularProfile SingularProfile::none() { return {}; }

double SingularProfile::operator()(double t) const {
  switch (kind_) {
    case ProfileKind::None:
      return 0.0;
    case ProfileKind::InversePower:
      if (t <= 0.0) return kInfinity;
      return scale_ * std::pow(t, -s_);
    case ProfileKind::Table: {
      if (t < nodes_.front().first) return kInfinity;
      if (t >= nodes_.back().first) return nodes_.back().second;
      const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                                       [](double x, const auto& node) { return x < node.first; });
      const auto& [t1, h1] = *it;
      const auto& [t0, h0] = *(it - 1);
      const double w = (t - t0) / (t1 - t0);
      return h0 + w * (h1 - h0);
    }
  }
  return 0.0;
}

double SingularProfile::sup_from(double delta) const {
  switch (kind_) {
    case ProfileKind::None:
      return 0.0;
    case ProfileKind::InversePower:
      return (*this)(delta);
    case ProfileKind::Table: {
      double r = (*this)(delta);
      for (const auto& [t, v] : nodes_)
        if (t >= delta) r = std::max(r, v);
      return r;
    }
  }
  return 0.0;
}

void StoredEnergySpec::validate() const {
  if (N < 1 || N > 3) throw InvalidArgument("spec: N must be 1, 2 or 3");
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidArgument("spec: p must be a finite real > 1");
}

double singular_argument(const StoredEnergySpec& spec, const DeformationGradient& xi) {
  if (xi.cols() != spec.N)
    throw DimensionMismatch("eval_W: xi has " + std::to_string(xi.cols()) + " columns, spec has N = " +
                            std::to_string(spec.N));
  switch (spec.N) {
    case 1:
      return xi.norm();
    case 2:
      return norm(cross(xi.col(0), xi.col(1)));
    default:
      return std::abs(det3(xi));
  }
}

double eval_W(const StoredEnergySpec& spec, const DeformationGradient& xi) {
  const double g = singular_argument(spec, xi);
  const double h = spec.profile(g);
  if (h == kInfinity) return kInfinity;
  return std::pow(xi.norm(), spec.p) + h;
}

std::string spec_hash(const StoredEnergySpec& spec) {
  std::ostringstream os;
  char buf[64];
  auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf << ',';
  };
  os << "N=" << spec.N << ",p=";
  put(spec.p);
  os << "kind=" << static_cast<int>(spec.profile.kind()) << ",s=";
  put(spec.profile.exponent());
  os << "scale=";
  put(spec.profile.scale());
  for (const auto& [t, v] : spec.profile.nodes()) {
    put(t);
    put(v);
  }
  os << "frame=" << spec.frame;
  // FNV-1a 64.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* to_string(ConditionKind k) {
  switch (k) {
    case ConditionKind::C1:
      return "C1";
    case ConditionKind::C2:
      return "C2";
    case ConditionKind::C3:
      return "C3";
    case ConditionKind::C4:
      return "C4";
  }
  return "?";
}

const char* to_string(VerifiedBy v) { return v == VerifiedBy::Analytic ? "analytic" : "sampled"; }

double ConditionCertificate::c_delta(double delta) const {
  for (const auto& [d, c] : c_of_delta)
    if (d == delta) return c;
  throw InvalidArgument("certificate: no c_delta for requested delta");
}

double growth_constant(const StoredEnergySpec& spec, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("growth constant: delta must be positive");
  const double r = spec.profile.sup_from(delta);
  if (!std::isfinite(r)) throw ProfileUnbounded("profile is unbounded on [delta, inf)");
  return std::max(1.0, r);
}

namespace {

void require_dimension(const StoredEnergySpec& spec, int n, const char* who) {
  spec.validate();
  if (spec.N != n) throw DimensionMismatch(std::string(who) + ": requires N = " + std::to_string(n));
}

// Log-spaced radius k of n over [lo, 1e3 lo].
double log_grid(double lo, std::size_t k, std::size_t n) {
  if (n <= 1) return lo;
  return lo * std::pow(1e3, static_cast<double>(k) / static_cast<double>(n - 1));
}

void finish_sampled(ConditionCertificate& cert, const std::vector<double>& ratios) {
  cert.sample_count = ratios.size();
  cert.worst_ratio = 0.0;
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i] > cert.worst_ratio) cert.worst_ratio = ratios[i];
    if (cert.passed && !(ratios[i] <= 1.0 + 1e-12)) {
      cert.passed = false;
      cert.violation = "sample " + std::to_string(i) + " ratio " + std::to_string(ratios[i]);
    }
  }
}

}  // namespace

ConditionCertificate certify_C1(const StoredEnergySpec& spec, double alpha, std::size_t samples,
                                std::uint64_t seed) {
  require_dimension(spec, 1, "certify_C1");
  if (!(alpha > 0.0)) throw InvalidArgument("certify_C1: alpha must be positive");
  ConditionCertificate cert;
  cert.kind = ConditionKind::C1;
  cert.alpha = alpha;
  cert.beta = growth_constant(spec, alpha);
  std::vector<double> ratios(samples);
  parallel_for(samples, [&](std::size_t k) {
    Rng rng(seed, k);
    const double r = log_grid(alpha, k, samples);
    const DeformationGradient xi = DeformationGradient::from_columns({r * rng.unit3()});
    ratios[k] = eval_W(spec, xi) / (cert.beta * (1.0 + std::pow(xi.norm(), spec.p)));
  });
  finish_sampled(cert, ratios);
  return cert;
}

ConditionCertificate certify_C2(const StoredEnergySpec& spec, double alpha, std::size_t samples,
                                std::uint64_t seed) {
  require_dimension(spec, 2, "certify_C2");
  if (!(alpha > 0.0)) throw InvalidArgument("certify_C2: alpha must be positive");
  ConditionCertificate cert;
  cert.kind = ConditionKind::C2;
  cert.alpha = alpha;
  cert.beta = growth_constant(spec, alpha);
  std::vector<double> ratios(samples);
  parallel_for(samples, [&](std::size_t k) {
    Rng rng(seed, k);
    const double area = log_grid(alpha, k, samples);
    Vec3 a = rng.normal3(), b = rng.normal3();
    double a0 = norm(cross(a, b));
    while (a0 < 1e-6) {
      b = rng.normal3();
      a0 = norm(cross(a, b));
    }
    const double shape = std::exp(rng.uniform(-2.0, 2.0));
    const double f = std::sqrt(area / a0);
    // The area after rescaling may undershoot alpha by rounding only.
    const DeformationGradient xi = DeformationGradient::from_columns({(f * shape) * a, (f / shape) * b});
    ratios[k] = eval_W(spec, xi) / (cert.beta * (1.0 + std::pow(xi.norm(), spec.p)));
  });
  finish_sampled(cert, ratios);
  return cert;
}

ConditionCertificate certify_C3(const StoredEnergySpec& spec, const std::vector<double>& deltas,
                                std::size_t samples_per_delta, std::uint64_t seed) {
  require_dimension(spec, 3, "certify_C3");
  if (deltas.empty()) throw InvalidArgument("certify_C3: no deltas");
  ConditionCertificate cert;
  cert.kind = ConditionKind::C3;
  for (double d : deltas) {
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidArgument("certify_C3: every delta must be positive");
    cert.c_of_delta.emplace_back(d, growth_constant(spec, d));
  }
  const std::size_t total = samples_per_delta * deltas.size();
  std::vector<double> ratios(total);
  parallel_for(total, [&](std::size_t idx) {
    const std::size_t which = idx / samples_per_delta;
    const std::size_t k = idx % samples_per_delta;
    const auto [delta, c] = cert.c_of_delta[which];
    Rng rng(seed, idx);
    const double target = log_grid(delta, k, samples_per_delta);
    DeformationGradient xi = rng.gaussian_matrix(3);
    double d0 = std::abs(det3(xi));
    while (d0 < 1e-6) {
      xi = rng.gaussian_matrix(3);
      d0 = std::abs(det3(xi));
    }
    xi = std::cbrt(target / d0) * xi;
    ratios[idx] = eval_W(spec, xi) / (c * (1.0 + std::pow(xi.norm(), spec.p)));
  });
  finish_sampled(cert, ratios);
  return cert;
}

ConditionCertificate verify_C4(const StoredEnergySpec& spec, std::size_t trials, std::uint64_t seed) {
  require_dimension(spec, 3, "verify_C4");
  ConditionCertificate cert;
  cert.kind = ConditionKind::C4;
  cert.verified_by = VerifiedBy::Sampled;
  cert.sample_count = trials;
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  std::vector<double> deviation(trials, 0.0);
  std::vector<char> bad(trials, 0);
  parallel_for(trials, [&](std::size_t i) {
    Rng rng(seed, i);
    DeformationGradient xi = rng.gaussian_matrix(3, std::exp(rng.uniform(-1.0, 1.5)));
    if (i % 5 == 4) xi.set_col(2, rng.normal() * xi.col(0) + rng.normal() * xi.col(1));
    if (i % 50 == 49) xi = DeformationGradient::zero(3);
    const Rotation3 p = rng.rotation();
    const Rotation3 q = rng.rotation();
    const DeformationGradient moved(3, p.matrix() * xi.padded() * q.matrix());
    const double w0 = eval_W(spec, xi);
    const double w1 = eval_W(spec, moved);
    // A determinant at rounding level counts as zero on both sides.
    const double floor = 64.0 * kEps * std::pow(std::max(xi.norm(), 1e-300), 3.0);
    auto degenerate = [&](const DeformationGradient& m, double w) {
      return w == kInfinity || std::abs(det3(m)) <= floor;
    };
    if (degenerate(xi, w0) || degenerate(moved, w1)) {
      if (!(degenerate(xi, w0) && degenerate(moved, w1))) bad[i] = 1;
      return;
    }
    const double diff = std::abs(w1 - w0);
    deviation[i] = diff / (1.0 + w0);
    if (diff > 1e-9 * (1.0 + w0)) bad[i] = 1;
  });
  for (std::size_t i = 0; i < trials; ++i) {
    cert.worst_ratio = std::max(cert.worst_ratio, deviation[i]);
    if (bad[i] && cert.passed) {
      cert.passed = false;
      cert.violation = "trial " + std::to_string(i) + " (seed " + std::to_string(seed) + ")";
    }
  }
  return cert;
}

}  // namespace relaxlab
