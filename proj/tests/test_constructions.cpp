#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "relaxlab/constructions.hpp"
#include "relaxlab/errors.hpp"
#include "relaxlab/random.hpp"

using namespace relaxlab;

namespace {

StoredEnergySpec model(int n, double p = 2.0) { return StoredEnergySpec{n, p, SingularProfile::inverse_power(1.0)}; }

DeformationGradient diag3(double a, double b, double c) { return DeformationGradient(3, Mat3::diag(a, b, c)); }

void check_valid(const PiecewiseAffineWitness& w) {
  const WitnessCheck c = check_witness(w);
  CHECK_MESSAGE(c.ok, c.message);
  CHECK(c.continuity_error <= 1e-10);
  CHECK(c.boundary_error == 0.0);
  CHECK(c.volume_error <= 1e-12);
}

double diamond_margin(const DeformationGradient& m) {
  return std::min(norm(m.col(0) + m.col(1)), norm(m.col(0) - m.col(1)));
}

}  // namespace

TEST_CASE("laminate_1d") {
  const StoredEnergySpec spec = model(1);
  SUBCASE("xi = 0") {
    const Construction c = laminate_1d(spec, DeformationGradient::zero(1), 1.0);
    CHECK(c.bound.witness_energy == doctest::Approx(4.5));
    CHECK(c.bound.formula_bound == doctest::Approx(16.0));
    CHECK(c.bound.route == "laminate_1d");
    CHECK(c.witness.cell_count() == 2);
    check_valid(c.witness);
  }
  SUBCASE("|xi| = alpha stays finite") {
    const Construction c = laminate_1d(spec, DeformationGradient::from_columns({{0.0, 0.6, 0.8}}), 1.0);
    CHECK(std::isfinite(c.bound.witness_energy));
    CHECK(c.bound.holds());
    for (const auto& g : c.witness.gradients()) CHECK(norm(g.col(0) + Vec3{0.0, 0.6, 0.8}) >= 1.0 - 1e-12);
  }
  SUBCASE("|xi| = 2 alpha uses the identity witness") {
    const DeformationGradient xi = DeformationGradient::from_columns({{2.0, 0.0, 0.0}});
    const Construction c = laminate_1d(spec, xi, 1.0);
    CHECK(c.bound.route == "identity");
    CHECK(c.witness.sup_norm() == 0.0);
    CHECK(c.bound.formula_bound == doctest::Approx(5.0));
    CHECK(c.bound.witness_energy == doctest::Approx(4.5));
  }
}

TEST_CASE("diamond_2d") {
  const StoredEnergySpec spec = model(2);
  const DeformationGradient xi = DeformationGradient::from_columns({unit_vector(0), unit_vector(1)});
  const Construction c = diamond_2d(spec, xi, 1.0);
  CHECK(c.witness.cell_count() == 4);
  check_valid(c.witness);
  for (const auto& g : c.witness.gradients()) {
    const DeformationGradient m = xi + g;
    CHECK(norm(cross(m.col(0), m.col(1))) == doctest::Approx(std::sqrt(3.0)));
  }
  CHECK(c.bound.witness_energy == doctest::Approx(4.0 + 1.0 / std::sqrt(3.0)));
  CHECK(c.bound.formula_bound == doctest::Approx(96.0));
  CHECK(diamond_gamma(spec, 1.0) == doctest::Approx(32.0));

  const Vec3 v{0.7, 0.1, 0.0};
  CHECK_THROWS_AS(diamond_2d(spec, DeformationGradient::from_columns({v, v}), 1.0), PreconditionFailed);
}

TEST_CASE("square_split_2d") {
  const StoredEnergySpec spec = model(2);
  SUBCASE("xi = 0") {
    const Construction c = square_split_2d(spec, DeformationGradient::zero(2), 1.0);
    CHECK(c.bound.formula_bound == doctest::Approx(256.0));
    CHECK(c.bound.holds_recursively());
    CHECK(c.bound.children.size() == 4);
    check_valid(c.witness);
  }
  SUBCASE("children satisfy the diamond precondition") {
    Rng rng(31);
    for (int k = 0; k < 300; ++k) {
      const DeformationGradient xi = rng.gaussian_matrix(2, 1.5);
      const Construction c = square_split_2d(spec, xi, 1.0);
      for (const auto& child : c.bound.children) CHECK(diamond_margin(child.xi) >= 1.0 - 1e-12);
      CHECK(c.bound.holds_recursively());
    }
  }
  SUBCASE("Pythagorean margin for independent columns") {
    const DeformationGradient xi = DeformationGradient::from_columns({{1, 0.5, 0}, {0.2, -1, 0.3}});
    const Construction c = square_split_2d(spec, xi, 1.0);
    const Vec3 a = xi.col(0), b = xi.col(1);
    const Vec3 nu = c.bound.children[0].xi.col(1) - b + (c.bound.children[0].xi.col(0) - a);
    CHECK(norm(nu) == doctest::Approx(1.0));
    CHECK(std::abs(dot(nu, a)) < 1e-12);
    CHECK(std::pow(norm(a + b + nu), 2) == doctest::Approx(std::pow(norm(a + b), 2) + 1.0));
  }
  SUBCASE("case of a single nonzero column") {
    const DeformationGradient xi = DeformationGradient::from_columns({unit_vector(0), kZero3});
    const Construction c = square_split_2d(spec, xi, 1.0);
    for (const auto& g : c.witness.gradients()) {
      CHECK(dot(g.col(0), unit_vector(0)) == 0.0);
      CHECK(dot(g.col(1), unit_vector(0)) == 0.0);
    }
  }
}

TEST_CASE("octahedron partition") {
  CHECK(octahedron_partition(1.0).total_cell_volume() == doctest::Approx(4.0 / 3.0));
  CHECK(octahedron_partition(2.0).total_cell_volume() == doctest::Approx(2.0 / 3.0));
  CHECK(octahedron_partition(-1.0).total_cell_volume() == doctest::Approx(4.0 / 3.0));
  CHECK(octahedron_partition(2.0).cells.size() == 8);
  CHECK_THROWS_AS(octahedron_partition(0.0), ZeroSlope);
  check_valid(octahedron_witness(2.0, {0.3, -0.2, 1.0}));
  check_valid(octahedron_witness(-0.5, {1.0, 0.0, 0.0}));
}

TEST_CASE("octa_witness_3d determinant table") {
  const StoredEnergySpec spec = model(3);
  SUBCASE("(e1|e2|e1), s = 2") {
    const DeformationGradient xi = DeformationGradient::from_columns({unit_vector(0), unit_vector(1), unit_vector(0)});
    const OctaWitness w = octa_witness_3d(spec, xi, 1.0, 0.0, 2.0);
    CHECK(norm(w.nu - unit_vector(2)) < 1e-15);
    CHECK(w.delta == doctest::Approx(1.0));
    int ones = 0, threes = 0;
    for (int i = 0; i < 8; ++i) {
      CHECK(w.det_abs[i] == doctest::Approx(w.det_expected[i]).epsilon(1e-12));
      ones += std::abs(w.det_abs[i] - 1.0) < 1e-12;
      threes += std::abs(w.det_abs[i] - 3.0) < 1e-12;
    }
    CHECK(ones == 4);
    CHECK(threes == 4);
    check_valid(w.witness);
  }
  SUBCASE("(e1|e2|0), s = 1") {
    const DeformationGradient xi = DeformationGradient::from_columns({unit_vector(0), unit_vector(1), kZero3});
    const OctaWitness w = octa_witness_3d(spec, xi, 0.0, 0.0, 1.0);
    for (double d : w.det_abs) CHECK(d == doctest::Approx(1.0));
  }
  SUBCASE("forbidden slopes") {
    const DeformationGradient xi = DeformationGradient::from_columns({unit_vector(0), unit_vector(1), unit_vector(0)});
    CHECK_THROWS_AS(octa_witness_3d(spec, xi, 1.0, 0.0, 1.0), ForbiddenSlope);
    CHECK_THROWS_AS(octa_witness_3d(spec, xi, 1.0, 0.0, -1.0), ForbiddenSlope);
    CHECK_THROWS_AS(octa_witness_3d(spec, xi, 1.0, 0.0, 0.0), ForbiddenSlope);
  }
}

TEST_CASE("choose_slope") {
  const auto margin = [](double l, double m, double t) {
    double d = kInfinity;
    for (double f : {0.0, l - m, m - l, l + m, -(l + m)}) d = std::min(d, std::abs(t - f));
    return d;
  };
  CHECK(choose_slope(0.0, 0.0) == 3.0);
  // Candidate 1 is forbidden for (1, 0); 4 = 2(1 + 1) has the widest margin.
  CHECK(choose_slope(1.0, 0.0) == 4.0);
  CHECK(choose_slope(2.0, -1.0) == 8.0);
  Rng rng(4);
  for (int k = 0; k < 500; ++k) {
    const double l = rng.uniform(-4, 4), m = rng.uniform(-4, 4);
    const double t = choose_slope(l, m);
    CHECK(margin(l, m, t) > 0.0);
    const double a = 1.0 + std::abs(l) + std::abs(m);
    for (double c : {1.0, 2.0, 3.0, a, 2.0 * a}) CHECK(margin(l, m, c) <= margin(l, m, t));
  }
}

TEST_CASE("rank-deficient cascade") {
  const StoredEnergySpec spec = model(3);
  const Vec3 e1 = unit_vector(0), e2 = unit_vector(1);
  SUBCASE("rank 2") {
    const CertifiedBound b =
        rank_deficient_bound_3d(spec, DeformationGradient::from_columns({e1, e2, e1}));
    CHECK(b.route == "rank2_octahedron");
    const auto table = octa_det_table(1.0, 0.0, choose_slope(1.0, 0.0));
    CHECK(b.det_margin == doctest::Approx(*std::min_element(table.begin(), table.end())));
    CHECK(std::isfinite(b.witness_energy));
    CHECK(b.holds_recursively());
  }
  SUBCASE("rank 1") {
    const CertifiedBound b =
        rank_deficient_bound_3d(spec, DeformationGradient::from_columns({e1, 2.0 * e1, 3.0 * e1}));
    CHECK(b.route == "rank1_octahedron");
    CHECK(b.depth() == 1);
    CHECK(std::isfinite(b.witness_energy));
    CHECK(b.holds_recursively());
  }
  SUBCASE("rank 0") {
    const CertifiedBound b = rank_deficient_bound_3d(spec, DeformationGradient::zero(3));
    CHECK(b.route == "rank0_octahedron");
    CHECK(b.depth() == 2);
    CHECK(std::isfinite(b.witness_energy));
    CHECK(b.holds_recursively());
  }
  SUBCASE("cascade witness is admissible") {
    for (const auto& xi : {DeformationGradient::from_columns({e1, e2, e1}),
                           DeformationGradient::from_columns({e1, 2.0 * e1, 3.0 * e1}), DeformationGradient::zero(3)}) {
      const PiecewiseAffineWitness w = rank_cascade_witness(xi);
      check_valid(w);
    }
  }
}

TEST_CASE("diagonal bound routes") {
  const StoredEnergySpec spec = model(3);
  const DiagonalConstants k = diagonal_constants(spec);
  CHECK(k.c1 == doctest::Approx(1.0));
  CHECK(k.c2 == doctest::Approx(4.0 * (1.0 + 12.0)));
  CHECK(k.c3 == doctest::Approx(16.0 * k.c2));
  CHECK(k.c >= std::max({k.c0, k.c2, k.c3}));

  SUBCASE("large determinant") {
    const CertifiedBound b = diagonal_bound_3d(spec, diag3(0.5, 3, 3));
    CHECK(b.route == "c1");
    CHECK(b.holds());
  }
  SUBCASE("octahedral leaf") {
    const CertifiedBound b = diagonal_bound_3d(spec, diag3(0, 2, 2));
    CHECK(b.route == "diag_octahedron");
    CHECK(b.det_margin == doctest::Approx(8.0));
    CHECK(b.holds());
  }
  SUBCASE("rank-one split") {
    const CertifiedBound b = diagonal_bound_3d(spec, diag3(5, 0, 0));
    CHECK(b.route == "diag_split");
    REQUIRE(b.children.size() == 2);
    const Mat3 plus = b.children[0].xi.padded(), minus = b.children[1].xi.padded();
    CHECK(max_abs(0.5 * (plus + minus) - Mat3::diag(5, 0, 0)) < 1e-15);
    CHECK(numeric_rank(DeformationGradient(3, plus - minus)) == 1);
    for (const auto& c : b.children) CHECK(c.route == "diag_octahedron");
    CHECK(b.holds_recursively());
  }
  SUBCASE("small ball") {
    const CertifiedBound b = diagonal_bound_3d(spec, diag3(0.5, 0.5, 0.5));
    CHECK(b.route == "small_ball");
    CHECK(b.holds_recursively());
  }
  Mat3 m = Mat3::diag(1, 2, 3);
  m(0, 1) = 0.1;
  CHECK_THROWS_AS(diagonal_bound_3d(spec, DeformationGradient(3, m)), NotDiagonal);
}

TEST_CASE("so3 reduction") {
  const StoredEnergySpec spec = model(3);
  Rng rng(8);
  SUBCASE("rotation is routed through a small diagonal") {
    const Rotation3 r = rng.rotation();
    const CertifiedBound b = so3_reduce_bound(spec, DeformationGradient(3, r.matrix()));
    REQUIRE(b.children.size() == 1);
    CHECK(frobenius(b.children[0].xi.padded()) == doctest::Approx(std::sqrt(3.0)));
    CHECK(b.holds_recursively());
  }
  SUBCASE("diag(2,1,-1)") {
    const CertifiedBound b = so3_reduce_bound(spec, diag3(2, 1, -1));
    const Mat3& z = b.children[0].xi.padded();
    std::array<double, 3> mags{std::abs(z(0, 0)), std::abs(z(1, 1)), std::abs(z(2, 2))};
    std::sort(mags.begin(), mags.end());
    CHECK(mags[0] == doctest::Approx(1.0));
    CHECK(mags[1] == doctest::Approx(1.0));
    CHECK(mags[2] == doctest::Approx(2.0));
    CHECK(frobenius(z) == doctest::Approx(std::sqrt(6.0)));
  }
  SUBCASE("invariance under rotations") {
    for (int k = 0; k < 50; ++k) {
      const DeformationGradient xi = rng.gaussian_matrix(3, 2.0);
      const CertifiedBound b0 = so3_reduce_bound(spec, xi);
      CHECK(b0.holds_recursively());
      const Mat3 P = rng.rotation().matrix(), Q = rng.rotation().matrix();
      const CertifiedBound b1 = so3_reduce_bound(spec, DeformationGradient(3, P * xi.padded() * Q));
      CHECK(b1.formula_bound == doctest::Approx(b0.formula_bound).epsilon(1e-9));
      CHECK(b1.witness_energy == doctest::Approx(b0.witness_energy).epsilon(1e-9));
    }
  }
  CHECK_THROWS_AS(so3_reduce_bound(spec, diag3(1, 1, 0)), SingularInput);
}

TEST_CASE("certified_bound routing") {
  Rng rng(12);
  for (int n = 1; n <= 3; ++n) {
    const StoredEnergySpec spec = model(n);
    for (int k = 0; k < 100; ++k) {
      const CertifiedBound b = certified_bound(spec, rng.gaussian_matrix(n, 1.5), 1.0);
      CHECK(b.holds_recursively());
    }
  }
  const CertifiedBound s = certified_bound(model(3), diag3(1, 0, 1), 1.0);
  CHECK(s.route == "rank2_octahedron");
}
