#ifndef RELAXLAB_ENERGY_HPP
#define RELAXLAB_ENERGY_HPP

// Stored-energy model family W(xi) = |xi|^p + h(g_N(xi)) with
//   g_1 = |xi|,  g_2 = |xi_1 ^ xi_2|,  g_3 = |det xi|,
// and certifiers for the growth conditions C1..C4.
//
// Energies are extended reals represented as double with +inf as a regular
// value. All terms are nonnegative, so sums and minima never produce NaN.

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "relaxlab/tensor.hpp"

namespace relaxlab {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class ProfileKind { InversePower, Table, None };

/// The singular part h : [0, inf) -> [0, +inf].
class SingularProfile {
 public:
  /// h(t) = scale * t^(-s), h(0) = +inf.
  static SingularProfile inverse_power(double s, double scale = 1.0);
  /// Piecewise-linear through sorted (t, h) nodes; +inf below the first node,
  /// constant beyond the last.
  static SingularProfile table(std::vector<std::pair<double, double>> nodes);
  static SingularProfile none();

  ProfileKind kind() const { return kind_; }
  double exponent() const { return s_; }
  double scale() const { return scale_; }
  const std::vector<std::pair<double, double>>& nodes() const { return nodes_; }

  double operator()(double t) const;
  /// r_delta = sup_{t >= delta} h(t); +inf when unbounded.
  double sup_from(double delta) const;

 private:
  ProfileKind kind_ = ProfileKind::None;
  double s_ = 0.0;
  double scale_ = 1.0;
  std::vector<std::pair<double, double>> nodes_;
};

struct StoredEnergySpec {
  int N = 3;
  double p = 2.0;
  SingularProfile profile = SingularProfile::none();
  /// For N = 3 the model depends on (|xi|, |det xi|) only.
  bool frame = true;

  /// Throws InvalidArgument on N outside {1,2,3} or p <= 1.
  void validate() const;
};

/// g_N(xi): |xi|, |xi_1 ^ xi_2| or |det xi|.
double singular_argument(const StoredEnergySpec& spec, const DeformationGradient& xi);

/// W(xi); throws DimensionMismatch when xi does not have spec.N columns.
double eval_W(const StoredEnergySpec& spec, const DeformationGradient& xi);

/// Canonical 16-hex-digit hash of the spec's JSON form.
std::string spec_hash(const StoredEnergySpec& spec);

enum class ConditionKind { C1, C2, C3, C4 };
enum class VerifiedBy { Analytic, Sampled };

const char* to_string(ConditionKind k);
const char* to_string(VerifiedBy v);

struct ConditionCertificate {
  ConditionKind kind = ConditionKind::C1;
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<std::pair<double, double>> c_of_delta;  // (delta, c_delta)
  VerifiedBy verified_by = VerifiedBy::Analytic;
  std::size_t sample_count = 0;
  /// max over samples of W / (constant * (1 + |xi|^p)); <= 1 when verified.
  double worst_ratio = 0.0;
  bool passed = true;
  std::string violation;

  /// c_delta for a requested delta; throws InvalidArgument if absent.
  double c_delta(double delta) const;
};

inline constexpr std::size_t kCertifierSamples = 1000;

/// beta = max{1, r_alpha}; sampled over |xi| in [alpha, 1e3 alpha].
ConditionCertificate certify_C1(const StoredEnergySpec& spec, double alpha,
                                std::size_t samples = kCertifierSamples, std::uint64_t seed = 0);
/// As certify_C1 with g_2, sampling pairs with |xi_1 ^ xi_2| >= alpha.
ConditionCertificate certify_C2(const StoredEnergySpec& spec, double alpha,
                                std::size_t samples = kCertifierSamples, std::uint64_t seed = 0);
/// c_delta = max{1, r_delta} for each requested delta > 0.
ConditionCertificate certify_C3(const StoredEnergySpec& spec, const std::vector<double>& deltas,
                                std::size_t samples_per_delta = kCertifierSamples, std::uint64_t seed = 0);
/// Samples (xi, P, Q) and compares W(P xi Q) with W(xi).
ConditionCertificate verify_C4(const StoredEnergySpec& spec, std::size_t trials, std::uint64_t seed);

/// Analytic constant max{1, r_delta}; throws ProfileUnbounded when r_delta = +inf.
double growth_constant(const StoredEnergySpec& spec, double delta);

}  // namespace relaxlab

#endif  // RELAXLAB_ENERGY_HPP
