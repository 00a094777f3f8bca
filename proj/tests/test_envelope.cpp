#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relaxlab/constructions.hpp"
#include "relaxlab/envelope.hpp"
#include "relaxlab/errors.hpp"
#include "relaxlab/random.hpp"

using namespace relaxlab;

namespace {

const double kWss0 = std::pow(2.0, -2.0 / 3.0) + std::pow(2.0, 1.0 / 3.0);

StoredEnergySpec model(int n, double p = 2.0) { return StoredEnergySpec{n, p, SingularProfile::inverse_power(1.0)}; }
StoredEnergySpec convex(int n) { return StoredEnergySpec{n, 2.0, SingularProfile::none()}; }

DeformationGradient e1_times(double r) { return DeformationGradient::from_columns({{r, 0.0, 0.0}}); }

}  // namespace

TEST_CASE("model integrand agrees with W") {
  Rng rng(1);
  for (int n = 1; n <= 3; ++n) {
    const StoredEnergySpec spec = model(n, 1.5);
    const CellIntegrand f = model_integrand(spec);
    for (int k = 0; k < 100; ++k) {
      const DeformationGradient xi = rng.gaussian_matrix(n);
      CHECK(f(xi.padded()) == doctest::Approx(eval_W(spec, xi)).epsilon(1e-13));
    }
  }
}

TEST_CASE("1D Z estimate at xi = 0") {
  const std::vector<EnvelopeEstimate> est = z_estimate_levels(model(1), DeformationGradient::zero(1), 5, 2, 0);
  REQUIRE(est.size() == 6);
  for (int L = 1; L <= 5; ++L) {
    CHECK(est[L].value <= 4.5);
    CHECK(est[L].value >= kWss0 - 1e-9);
    CHECK(est[L].value <= est[L - 1].value + 1e-10);
    CHECK(est[L].level == L);
  }
  CHECK(std::abs(est[5].value - kWss0) < 1e-6);
  const EnvelopeEstimate& e = est[5];
  CHECK(witness_energy(model(1), DeformationGradient::zero(1), e.witness) ==
        doctest::Approx(e.value).epsilon(1e-12));
  CHECK(check_witness(e.witness).ok);
}

TEST_CASE("convex spec gives W itself") {
  const DeformationGradient xi = DeformationGradient::from_columns({{0.3, -0.4, 1.2}, {0.5, 0.1, 0.0}});
  const EnvelopeEstimate e = z_estimate(convex(2), xi, 2, 1, 3);
  CHECK(e.value == doctest::Approx(eval_W(convex(2), xi)).epsilon(1e-9));
  CHECK(e.witness.sup_norm() < 1e-4);
}

TEST_CASE("3D estimates") {
  const EnvelopeEstimate id = z_estimate(model(3), DeformationGradient(3, Mat3::identity()), 1, 1, 0);
  CHECK(id.value <= 4.0 + 1e-12);
  CHECK(id.status == EstimateStatus::Ok);

  const EnvelopeEstimate zero = z_estimate(model(3), DeformationGradient::zero(3), 1, 1, 0);
  CHECK(zero.value == kInfinity);
  CHECK(zero.status == EstimateStatus::NonFiniteStart);
}

TEST_CASE("estimator guards and reproducibility") {
  CHECK_THROWS_AS(z_estimate(model(1), e1_times(0.0), 7, 0, 0), ResourceGuard);
  CHECK_THROWS_AS(z_estimate(model(1), DeformationGradient::zero(2), 1, 0, 0), DimensionMismatch);
  CHECK_THROWS_AS(z_estimate(model(1), e1_times(0.0), 1, -1, 0), InvalidArgument);
  const EnvelopeEstimate a = z_estimate(model(2), DeformationGradient::zero(2), 2, 2, 77);
  const EnvelopeEstimate b = z_estimate(model(2), DeformationGradient::zero(2), 2, 2, 77);
  CHECK(a.value == b.value);
  CHECK(a.witness.nodal_values() == b.witness.nodal_values());
}

TEST_CASE("2D estimates are bounded by the square split") {
  const DeformationGradient xi = DeformationGradient::from_columns({{1.0, 0.2, 0.0}, {0.0, 1.0, 0.3}});
  const std::vector<EnvelopeEstimate> est = z_estimate_levels(model(2), xi, 3, 1, 0);
  for (std::size_t L = 1; L < est.size(); ++L) CHECK(est[L].value <= est[L - 1].value + 1e-10);
  CHECK(est.back().value <= eval_W(model(2), xi) + 1e-12);
  CHECK(est.back().value <= square_split_2d(model(2), xi, 1.0).bound.witness_energy + 1e-12);
}

TEST_CASE("biconjugate examples") {
  const RadialEnvelope1D env = biconjugate_radial(model(1));
  CHECK(env.at(0.0) == doctest::Approx(kWss0).epsilon(1e-9));
  CHECK(env.at(5.0) == doctest::Approx(25.2).epsilon(1e-12));
  CHECK(env(e1_times(5.0)) == doctest::Approx(25.2).epsilon(1e-12));
  REQUIRE(!env.bridges.empty());
  CHECK(env.bridges.front().b == doctest::Approx(std::pow(2.0, -1.0 / 3.0)).epsilon(1e-7));

  const ConvexityReport rep = check_biconjugate(env);
  CHECK(rep.max_three_point_violation <= 1e-12);
  CHECK(rep.max_excess_over_w <= 1e-12);

  for (double r : {0.0, 0.3, 0.7, 1.5, 4.0}) {
    const double oracle = two_point_oracle(model(1), r);
    CHECK(env.at(r) <= oracle + 1e-9);
    CHECK(env.at(r) >= oracle - 1e-4);
  }

  const RadialEnvelope1D flat = biconjugate_radial(convex(1));
  for (double r : {0.0, 0.5, 2.0, 7.5}) CHECK(flat.at(r) == doctest::Approx(r * r).epsilon(1e-12));
  CHECK(flat.bridges.empty());

  CHECK_THROWS_AS(biconjugate_radial(model(2)), DimensionMismatch);
}

TEST_CASE("hierarchy check") {
  const HierarchyReport r = hierarchy_check(model(1), DeformationGradient::zero(1), 5);
  CHECK(r.monotone);
  CHECK(r.final_gap < 0.05);
  CHECK(r.rows.size() == 6);

  const HierarchyReport c = hierarchy_check(convex(1), e1_times(0.7), 3);
  for (const auto& row : c.rows) CHECK(std::abs(row.gap) < 1e-9);

  const HierarchyReport big = hierarchy_check(model(1), e1_times(5.0), 3);
  CHECK(std::abs(big.final_gap) < 1e-6);

  CHECK_THROWS_AS(hierarchy_check(model(2), DeformationGradient::zero(2), 1), PreconditionFailed);
}

TEST_CASE("quasiconvexity probe") {
  const ProbeReport three = convexity_violation({{0.0, 1.0}, {1.0, 3.0}, {2.0, 2.0}});
  CHECK(three.max_violation == doctest::Approx(1.5));
  CHECK(three.at_t == 1.0);

  const StoredEnergySpec cs = convex(3);
  const auto W = [&](const DeformationGradient& x) { return eval_W(cs, x); };
  const DeformationGradient eta(3, outer({1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}));
  std::vector<double> ts;
  for (int k = -5; k <= 5; ++k) ts.push_back(0.2 * k);
  const ProbeReport z = quasiconvexity_probe(W, DeformationGradient(3, Mat3::identity()), eta, ts);
  CHECK(z.max_violation <= 1e-12);
  CHECK_FALSE(z.flagged);

  CHECK_THROWS_AS(quasiconvexity_probe(W, DeformationGradient(3, Mat3::identity()),
                                       DeformationGradient(3, Mat3::identity()), ts),
                  PreconditionFailed);

  const RadialEnvelope1D env = biconjugate_radial(model(1));
  const auto Wss = [&](const DeformationGradient& x) { return env(x); };
  const ProbeReport one = quasiconvexity_probe(Wss, e1_times(0.0), e1_times(1.0), ts);
  CHECK(one.max_violation <= 1e-9);
}

TEST_CASE("estimate is sub-averaging along laminates") {
  const RadialEnvelope1D env = biconjugate_radial(model(1));
  for (double r : {0.0, 0.2, 0.5}) {
    const double z = z_estimate(model(1), e1_times(r), 4, 1, 0).value;
    CHECK(z <= 0.5 * (radial_w(model(1), r + 1.0) + radial_w(model(1), std::abs(r - 1.0))) + 1e-12);
    CHECK(z >= env.at(r) - 1e-9);
  }
}

TEST_CASE("small-ball diagnostic") {
  const StoredEnergySpec spec = model(3);
  const SmallBallEstimate s = small_ball_estimate(spec, 1);
  CHECK(s.evaluated == 35);
  CHECK(s.non_finite > 0);
  CHECK(s.non_finite < s.evaluated);
  CHECK(std::isfinite(s.value));
  const DiagonalConstants k = diagonal_constants(spec);
  CHECK(s.value <= k.c0 * (1.0 + 3.0));
  const SmallBallEstimate again = small_ball_estimate(spec, 1);
  CHECK(again.value == s.value);
  CHECK_THROWS_AS(small_ball_estimate(model(2), 1), DimensionMismatch);
}
