#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "relaxlab/energy.hpp"
#include "relaxlab/errors.hpp"
#include "relaxlab/random.hpp"

using namespace relaxlab;

namespace {

StoredEnergySpec model(int n, double p = 2.0, double scale = 1.0) {
  return StoredEnergySpec{n, p, SingularProfile::inverse_power(1.0, scale)};
}

StoredEnergySpec convex(int n) { return StoredEnergySpec{n, 2.0, SingularProfile::none()}; }

}  // namespace

TEST_CASE("W on the model spec") {
  const DeformationGradient x1 = DeformationGradient::from_columns({{2.0, 0.0, 0.0}});
  CHECK(eval_W(model(1), x1) == doctest::Approx(4.5));

  const DeformationGradient x2 = DeformationGradient::from_columns({unit_vector(0), unit_vector(1)});
  CHECK(eval_W(model(2), x2) == doctest::Approx(3.0));

  const DeformationGradient flat = DeformationGradient(3, Mat3::diag(1, 2, 0));
  CHECK(eval_W(model(3), flat) == kInfinity);
  CHECK(std::isinf(eval_W(model(1), DeformationGradient::zero(1))));

  CHECK_THROWS_AS(eval_W(model(3), x2), DimensionMismatch);
}

TEST_CASE("spec validation and hashing") {
  StoredEnergySpec bad = model(3);
  bad.p = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  bad = model(3);
  bad.N = 4;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK(spec_hash(model(3)) == spec_hash(model(3)));
  CHECK(spec_hash(model(3)) != spec_hash(model(2)));
  CHECK(spec_hash(model(3)).size() == 16);
}

TEST_CASE("profiles") {
  const SingularProfile h = SingularProfile::inverse_power(2.0, 3.0);
  CHECK(h(0.0) == kInfinity);
  CHECK(h(0.5) == doctest::Approx(12.0));
  CHECK(h.sup_from(1.0) == doctest::Approx(3.0));

  const SingularProfile t = SingularProfile::table({{0.5, 10.0}, {1.0, 7.0}, {2.0, 3.0}});
  CHECK(t(0.25) == kInfinity);
  CHECK(t(0.75) == doctest::Approx(8.5));
  CHECK(t(10.0) == doctest::Approx(3.0));
  CHECK(t.sup_from(1.0) == doctest::Approx(7.0));
  CHECK(t.sup_from(0.75) == doctest::Approx(8.5));

  CHECK(SingularProfile::none()(0.0) == 0.0);
}

TEST_CASE("C1 certificates") {
  const ConditionCertificate a = certify_C1(model(1), 1.0);
  CHECK(a.beta == doctest::Approx(1.0));
  CHECK(a.passed);
  CHECK(a.worst_ratio <= 1.0);

  CHECK(certify_C1(convex(1), 0.3).beta == doctest::Approx(1.0));

  const StoredEnergySpec table{1, 2.0, SingularProfile::table({{0.5, 10.0}, {1.0, 7.0}, {2.0, 3.0}})};
  const ConditionCertificate t = certify_C1(table, 1.0);
  CHECK(t.beta == doctest::Approx(7.0));
  CHECK(t.passed);
}

TEST_CASE("C2 certificates") {
  CHECK(certify_C2(model(2), 1.0).beta == doctest::Approx(1.0));
  CHECK(certify_C2(convex(2), 1.0).beta == doctest::Approx(1.0));
  const ConditionCertificate s = certify_C2(model(2, 2.0, 5.0), 1.0);
  CHECK(s.beta == doctest::Approx(5.0));
  CHECK(s.passed);
}

TEST_CASE("C3 certificates") {
  const ConditionCertificate c = certify_C3(model(3), {1.0, 0.1});
  CHECK(c.c_delta(1.0) == doctest::Approx(1.0));
  CHECK(c.c_delta(0.1) == doctest::Approx(10.0));
  CHECK(c.passed);
  CHECK_THROWS_AS(c.c_delta(0.5), InvalidArgument);

  const ConditionCertificate n = certify_C3(convex(3), {1.0, 0.01});
  CHECK(n.c_delta(0.01) == doctest::Approx(1.0));

  CHECK_THROWS_AS(certify_C3(model(3), {0.0}), InvalidArgument);
}

TEST_CASE("growth constant is nonincreasing in delta") {
  const StoredEnergySpec spec = model(3, 2.0);
  double prev = kInfinity;
  for (double d = 1e-3; d < 10.0; d *= 1.7) {
    const double c = growth_constant(spec, d);
    CHECK(c <= prev);
    prev = c;
  }
  const StoredEnergySpec unbounded{3, 2.0, SingularProfile::table({{0.5, 10.0}})};
  CHECK(growth_constant(unbounded, 1.0) == doctest::Approx(10.0));
  CHECK_THROWS_AS(growth_constant(unbounded, 0.1), ProfileUnbounded);
}

TEST_CASE("C4 frame indifference") {
  const ConditionCertificate c = verify_C4(model(3), 10000, 42);
  CHECK(c.passed);
  CHECK(c.sample_count == 10000);
  CHECK_THROWS_AS(verify_C4(model(2), 10, 0), DimensionMismatch);

  Rng rng(9);
  const DeformationGradient id(3, Mat3::identity());
  const Mat3 P = rng.rotation().matrix(), Q = rng.rotation().matrix();
  CHECK(eval_W(model(3), DeformationGradient(3, P * id.padded() * Q)) == doctest::Approx(eval_W(model(3), id)));
}

TEST_CASE("coercivity and blow-up") {
  Rng rng(1);
  for (int n = 1; n <= 3; ++n) {
    const StoredEnergySpec spec = model(n, 1.5);
    for (int k = 0; k < 300; ++k) {
      const DeformationGradient xi = rng.gaussian_matrix(n, 2.0);
      CHECK(eval_W(spec, xi) >= std::pow(xi.norm(), 1.5));
    }
  }
  double prev = 0.0;
  for (double t = 1.0; t > 1e-8; t *= 0.1) {
    const double v = eval_W(model(3), DeformationGradient(3, Mat3::diag(1, 1, t)));
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev > 1e7);
}
