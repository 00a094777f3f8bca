#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "relaxlab/errors.hpp"
#include "relaxlab/io.hpp"
#include "relaxlab/mesh.hpp"
#include "relaxlab/random.hpp"

using namespace relaxlab;
namespace fs = std::filesystem;

TEST_CASE("mesh sizes and volumes") {
  for (int dim = 1; dim <= 3; ++dim) {
    for (int level = 0; level <= (dim == 3 ? 3 : 4); ++level) {
      const MeshSpace m(dim, level);
      const std::size_t n = std::size_t{1} << level;
      std::size_t nodes = 1, cells = 1;
      for (int d = 0; d < dim; ++d) {
        nodes *= n + 1;
        cells *= n * static_cast<std::size_t>(d + 1);
      }
      CHECK(m.node_count() == nodes);
      CHECK(m.cell_count() == cells);
      CHECK(m.cell_volume() * static_cast<double>(m.cell_count()) == doctest::Approx(1.0));
      const DomainPartition p = m.partition();
      CHECK(p.total_cell_volume() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(MeshSpace(2, 7), ResourceGuard);
  CHECK_THROWS_AS(MeshSpace(4, 1), InvalidArgument);
}

TEST_CASE("every simplex owns an interior node from level 1") {
  for (int dim = 1; dim <= 3; ++dim) {
    const MeshSpace m(dim, dim == 3 ? 2 : 3);
    for (std::size_t c = 0; c < m.cell_count(); ++c) {
      bool interior = false;
      for (int k = 0; k <= dim; ++k) interior = interior || !m.on_boundary(m.cell_nodes(c)[k]);
      CHECK(interior);
    }
  }
}

TEST_CASE("affine fields are reproduced exactly") {
  Rng rng(2);
  for (int dim = 1; dim <= 3; ++dim) {
    const MeshSpace m(dim, 2);
    const DeformationGradient G = rng.gaussian_matrix(dim);
    std::vector<Vec3> values(m.node_count());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = G.padded() * m.node(i);
    for (std::size_t c = 0; c < m.cell_count(); ++c) CHECK(max_abs(m.gradient(c, values) - G.padded()) < 1e-12);
    const Vec3 x{0.37, 0.61, 0.13};
    Vec3 xd = x;
    for (int d = dim; d < 3; ++d) xd[d] = 0.0;
    CHECK(norm(m.interpolate(values, xd) - G.padded() * xd) < 1e-12);
  }
}

TEST_CASE("prolongation is exact on nested meshes") {
  Rng rng(6);
  for (int dim = 1; dim <= 3; ++dim) {
    const MeshSpace coarse(dim, 1), fine(dim, 2);
    std::vector<Vec3> v(coarse.node_count(), kZero3);
    for (std::uint32_t i : coarse.interior_nodes()) v[i] = rng.normal3();
    const std::vector<Vec3> f = coarse.prolongate(v, fine);
    for (int k = 0; k < 50; ++k) {
      Vec3 x{rng.uniform(), rng.uniform(), rng.uniform()};
      for (int d = dim; d < 3; ++d) x[d] = 0.0;
      CHECK(norm(coarse.interpolate(v, x) - fine.interpolate(f, x)) < 1e-12);
    }
    for (std::size_t i = 0; i < fine.node_count(); ++i)
      if (fine.on_boundary(i)) CHECK(norm(f[i]) == 0.0);
  }
}

TEST_CASE("mesh witness is admissible") {
  Rng rng(3);
  const MeshSpace m(2, 3);
  std::vector<Vec3> v(m.node_count(), kZero3);
  for (std::uint32_t i : m.interior_nodes()) v[i] = rng.normal3();
  const WitnessCheck c = check_witness(m.to_witness(v));
  CHECK_MESSAGE(c.ok, c.message);
}

TEST_CASE("spec round trip") {
  const io::json j = io::json::parse(R"({"N":3,"p":2.5,"profile":{"kind":"inverse_power","s":1.5,"scale":2.0}})");
  const StoredEnergySpec s = io::parse_spec(j);
  CHECK(s.N == 3);
  CHECK(s.p == 2.5);
  CHECK(s.profile.exponent() == 1.5);
  CHECK(s.profile.scale() == 2.0);
  const StoredEnergySpec back = io::parse_spec(io::spec_to_json(s));
  CHECK(spec_hash(back) == spec_hash(s));

  const io::json t = io::json::parse(R"({"N":1,"p":2,"profile":{"kind":"table","points":[[0.5,4],[2,1]]}})");
  const StoredEnergySpec ts = io::parse_spec(t);
  CHECK(ts.profile.kind() == ProfileKind::Table);
  CHECK(spec_hash(io::parse_spec(io::spec_to_json(ts))) == spec_hash(ts));

  CHECK_THROWS_AS(io::parse_spec(io::json::parse(R"({"N":3})")), ParseError);
  CHECK_THROWS_AS(io::parse_spec(io::json::parse(R"({"N":5,"p":2,"profile":{"kind":"none"}})")), ParseError);
  CHECK_THROWS_AS(io::parse_spec(io::json::parse(R"({"N":3,"p":2,"profile":{"kind":"cubic"}})")), ParseError);
}

TEST_CASE("matrix and real round trips") {
  Rng rng(9);
  for (int n = 1; n <= 3; ++n) {
    const DeformationGradient xi = rng.gaussian_matrix(n);
    const DeformationGradient back = io::matrix_from_json(io::matrix_to_json(xi));
    CHECK(back.cols() == n);
    CHECK(max_abs(back.padded() - xi.padded()) == 0.0);
  }
  const DeformationGradient flat = io::parse_matrix("[1,2,3,4,5,6]", 2);
  CHECK(flat(2, 1) == 6.0);
  CHECK_THROWS_AS(io::parse_matrix("[1,2,3,4]", 2), ParseError);
  CHECK_THROWS_AS(io::parse_matrix("not json"), ParseError);

  CHECK(io::format_real(kInfinity) == "inf");
  CHECK(io::real_to_json(kInfinity) == "inf");
  for (double x : {0.1, 1.0 / 3.0, 1.889881574842, -2.5e-300, 12345678.9}) CHECK(std::stod(io::format_real(x)) == x);
}

TEST_CASE("csv and atomic writes") {
  io::CsvTable t({"a", "b"});
  t.add_meta("command", "test");
  t.add_row({"1", "2"});
  const std::string s = t.str();
  CHECK(s.find("# command: test") != std::string::npos);
  CHECK(s.find("a,b\n1,2\n") != std::string::npos);

  const fs::path dir = fs::temp_directory_path() / "relaxlab_test_io";
  fs::create_directories(dir);
  io::atomic_write(dir / "x.txt", "hello");
  io::atomic_write(dir / "x.txt", "world");
  CHECK(io::read_file(dir / "x.txt") == "world");
  fs::remove_all(dir);
}

TEST_CASE("deterministic random streams") {
  Rng a(5, 3), b(5, 3), c(5, 4);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
  Rng r(1);
  for (int k = 0; k < 100; ++k) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const Mat3 q = r.rotation().matrix();
    CHECK(det(q) == doctest::Approx(1.0));
  }
}
