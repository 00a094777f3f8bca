#include "relaxlab/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "relaxlab/constructions.hpp"
#include "relaxlab/energy.hpp"
#include "relaxlab/envelope.hpp"
#include "relaxlab/errors.hpp"
#include "relaxlab/io.hpp"
#include "relaxlab/parallel.hpp"
#include "relaxlab/random.hpp"
#include "relaxlab/relax.hpp"

namespace relaxlab::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

constexpr std::size_t kMaxGridPoints = 1'000'000;

// Thrown when an assertion checked by a command fails (exit code 1).
struct AssertionFailure : Error {
  using Error::Error;
};

struct Common {
  std::string spec_path;
  std::uint64_t seed = 0;
  std::string out_dir = "relaxlab_out";
  std::string format = "csv";
};

// Rows hold JSON scalars so that one table renders to either CSV or JSON.
class Table {
 public:
  explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<json> row) { rows_.push_back(std::move(row)); }
  std::size_t size() const { return rows_.size(); }

  std::string render(const std::string& format, const std::vector<std::pair<std::string, std::string>>& meta) const {
    if (format == "json") {
      json meta_obj = json::object();
      for (const auto& [k, v] : meta) meta_obj[k] = v;
      json rows = json::array();
      for (const auto& r : rows_) {
        json o = json::object();
        for (std::size_t i = 0; i < header_.size(); ++i) o[header_[i]] = r[i];
        rows.push_back(o);
      }
      return json{{"meta", meta_obj}, {"rows", rows}}.dump(2) + "\n";
    }
    io::CsvTable t(header_);
    for (const auto& [k, v] : meta) t.add_meta(k, v);
    for (const auto& r : rows_) {
      std::vector<std::string> cells;
      for (const auto& c : r) cells.push_back(cell_text(c));
      t.add_row(std::move(cells));
    }
    return t.str();
  }

 private:
  static std::string cell_text(const json& c) {
    if (c.is_string()) return c.get<std::string>();
    if (c.is_boolean()) return c.get<bool>() ? "true" : "false";
    if (c.is_number_unsigned()) return std::to_string(c.get<unsigned long long>());
    if (c.is_number_integer()) return std::to_string(c.get<long long>());
    if (c.is_number()) return io::format_real(c.get<double>());
    return c.dump();
  }

  std::vector<std::string> header_;
  std::vector<std::vector<json>> rows_;
};

json real(double x) { return io::real_to_json(x); }

std::string xi_text(const DeformationGradient& xi) { return io::matrix_to_json(xi).dump(); }

class Run {
 public:
  Run(std::string command, const Common& c, std::vector<std::string> args)
      : command_(std::move(command)), common_(c), args_(std::move(args)), start_(std::chrono::steady_clock::now()) {
    if (common_.format != "csv" && common_.format != "json")
      throw ParseError("--format must be csv or json");
  }

  StoredEnergySpec load_spec() {
    if (common_.spec_path.empty()) throw ParseError("--spec is required");
    spec_ = io::load_spec(common_.spec_path);
    hash_ = spec_hash(*spec_);
    return *spec_;
  }

  std::vector<std::pair<std::string, std::string>> meta() const {
    std::vector<std::pair<std::string, std::string>> m{{"command", command_},
                                                       {"spec_hash", hash_},
                                                       {"seed", std::to_string(common_.seed)},
                                                       {"units", "energies are averages per unit reference volume"}};
    return m;
  }

  void write_table(const std::string& stem, const Table& t) {
    write(stem + "." + common_.format, t.render(common_.format, meta()));
  }

  void write_json(const std::string& name, json j) {
    j["spec_hash"] = hash_;
    j["seed"] = common_.seed;
    write(name, j.dump(2) + "\n");
  }

  void write_text(const std::string& name, const std::string& text) { write(name, text); }

  void write_manifest(int exit_code, const std::string& message) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json j = {{"command", command_},         {"arguments", args_},
              {"spec_hash", hash_},          {"seed", common_.seed},
              {"tool_version", kToolVersion}, {"wall_time_s", wall},
              {"outputs", outputs_},         {"threads", thread_count()},
              {"exit_code", exit_code}};
    if (!message.empty()) j["message"] = message;
    if (spec_) j["spec"] = io::spec_to_json(*spec_);
    io::atomic_write(fs::path(common_.out_dir) / (command_ + "_manifest.json"), j.dump(2) + "\n");
  }

  const Common& common() const { return common_; }
  const std::vector<std::string>& outputs() const { return outputs_; }

 private:
  void write(const std::string& name, const std::string& content) {
    const fs::path p = fs::path(common_.out_dir) / name;
    io::atomic_write(p, content);
    outputs_.push_back(p.string());
  }

  std::string command_;
  Common common_;
  std::vector<std::string> args_;
  std::chrono::steady_clock::time_point start_;
  std::optional<StoredEnergySpec> spec_;
  std::string hash_ = "none";
  std::vector<std::string> outputs_;
};

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError(std::string(what) + ": cannot parse \"" + tok + "\"");
    }
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const char* what) {
  std::vector<int> out;
  for (double v : parse_list(text, what)) {
    if (v != std::floor(v)) throw ParseError(std::string(what) + ": expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// A JSON matrix literal or a comma list of 3N row-major entries.
DeformationGradient parse_xi(const std::string& text, int n) {
  const auto first = text.find_first_not_of(" \t");
  if (first != std::string::npos && text[first] == '[') return io::parse_matrix(text, n);
  const auto v = parse_list(text, "matrix");
  if (static_cast<int>(v.size()) != 3 * n)
    throw ParseError("matrix: expected " + std::to_string(3 * n) + " entries, got " + std::to_string(v.size()));
  for (double x : v)
    if (!std::isfinite(x)) throw ParseError("matrix: entries must be finite");
  return DeformationGradient::from_row_major(n, v);
}

std::vector<DeformationGradient> read_xi_csv(const std::string& path, int n) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  std::vector<DeformationGradient> out;
  std::stringstream ss(text);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto p = line.find_first_not_of(" \t");
    if (p == std::string::npos || line[p] == '#') continue;
    const bool numeric = std::isdigit(static_cast<unsigned char>(line[p])) || line[p] == '-' || line[p] == '+' ||
                         line[p] == '.';
    if (first && !numeric) {  // header row
      first = false;
      continue;
    }
    first = false;
    out.push_back(parse_xi(line, n));
  }
  return out;
}

// "lo:hi:count" -> r E for r on the grid, E the first N columns of the identity.
std::vector<DeformationGradient> grid_xi(const std::string& text, int n) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ':')) v.push_back(parse_list(tok, "--grid").at(0));
  if (v.size() != 3 || v[2] < 0.0 || v[2] != std::floor(v[2])) throw ParseError("--grid expects lo:hi:count");
  if (v[2] > static_cast<double>(kMaxGridPoints)) throw ResourceGuard("--grid exceeds 10^6 points");
  const auto count = static_cast<std::size_t>(v[2]);
  std::vector<DeformationGradient> out;
  for (std::size_t k = 0; k < count; ++k) {
    const double r = count == 1 ? v[0] : v[0] + (v[1] - v[0]) * static_cast<double>(k) / static_cast<double>(count - 1);
    DeformationGradient xi(n);
    for (int j = 0; j < n; ++j) xi(j, j) = r;
    out.push_back(xi);
  }
  return out;
}

// Gaussian matrices; for N = 3 every third one has xi_3 in span(xi_1, xi_2).
std::vector<DeformationGradient> random_xi(std::size_t count, int n, std::uint64_t seed) {
  if (count > kMaxGridPoints) throw ResourceGuard("--random exceeds 10^6 points");
  std::vector<DeformationGradient> out;
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(seed, k);
    DeformationGradient xi = rng.gaussian_matrix(n, 2.0);
    if (n == 3 && k % 3 == 2) {
      const double a = rng.normal(), b = rng.normal();
      xi.set_col(2, a * xi.col(0) + b * xi.col(1));
    }
    out.push_back(xi);
  }
  return out;
}

struct XiSource {
  std::string xi, grid, csv;
  std::size_t random = 0;
  bool random_set = false;

  std::vector<DeformationGradient> resolve(int n, std::uint64_t seed, bool default_zero) const {
    const int given = !xi.empty() + !grid.empty() + !csv.empty() + random_set;
    if (given > 1) throw ParseError("give at most one of --xi, --grid, --xi-csv, --random");
    if (!xi.empty()) return {parse_xi(xi, n)};
    if (!grid.empty()) return grid_xi(grid, n);
    if (!csv.empty()) return read_xi_csv(csv, n);
    if (random_set) return random_xi(random, n, seed);
    if (default_zero) return {DeformationGradient(n)};
    return {};
  }
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--spec", c.spec_path, "Stored-energy spec (JSON)");
  sub->add_option("--seed", c.seed, "Master seed");
  sub->add_option("--out", c.out_dir, "Output directory");
  sub->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_xi_source(CLI::App* sub, XiSource& s) {
  sub->add_option("--xi", s.xi, "Matrix as JSON rows or 3N comma-separated row-major entries");
  sub->add_option("--grid", s.grid, "lo:hi:count, xi = r * identity columns");
  sub->add_option("--xi-csv", s.csv, "CSV file, one row-major matrix per line");
  sub->add_option("--random", s.random, "Number of seeded Gaussian matrices")->each([&s](const std::string&) {
    s.random_set = true;
  });
}

// ---- Commands -------------------------------------------------------------

struct CheckArgs {
  double alpha = 1.0;
  std::string deltas = "1,0.1";
  std::size_t trials = 200;
  std::size_t samples = kCertifierSamples;
};

int cmd_check(Run& run, const CheckArgs& a, std::ostream& out) {
  const StoredEnergySpec spec = run.load_spec();
  const std::uint64_t seed = run.common().seed;
  std::vector<ConditionCertificate> certs;
  switch (spec.N) {
    case 1:
      certs.push_back(certify_C1(spec, a.alpha, a.samples, seed));
      break;
    case 2:
      certs.push_back(certify_C2(spec, a.alpha, a.samples, seed));
      break;
    default:
      certs.push_back(certify_C3(spec, parse_list(a.deltas, "--deltas"), a.samples, seed));
  }
  if (spec.N == 3) certs.push_back(verify_C4(spec, a.trials, derive_seed(seed, 4)));
  bool ok = true;
  json arr = json::array();
  Table t({"condition", "verified_by", "samples", "worst_ratio", "passed", "constants"});
  for (const auto& c : certs) {
    ok = ok && c.passed;
    arr.push_back(io::certificate_to_json(c));
    std::string consts;
    if (c.kind == ConditionKind::C1 || c.kind == ConditionKind::C2)
      consts = "alpha=" + io::format_real(c.alpha) + ";beta=" + io::format_real(c.beta);
    for (const auto& [d, v] : c.c_of_delta)
      consts += (consts.empty() ? "" : ";") + std::string("c_") + io::format_real(d) + "=" + io::format_real(v);
    t.add({to_string(c.kind), to_string(c.verified_by), c.sample_count, real(c.worst_ratio), c.passed, consts});
  }
  run.write_json("check.json", json{{"certificates", arr}, {"all_passed", ok}});
  run.write_table("check", t);
  out << (ok ? "all certificates passed\n" : "certificate failure\n");
  if (!ok) throw AssertionFailure("certificate failure");
  return kOk;
}

struct BoundsArgs {
  XiSource src;
  double alpha = 1.0;
  int tree_depth = 0;
};

int cmd_bounds(Run& run, const BoundsArgs& a, std::ostream& out) {
  const StoredEnergySpec spec = run.load_spec();
  const auto xis = a.src.resolve(spec.N, run.common().seed, false);
  std::vector<CertifiedBound> bounds(xis.size());
  std::vector<std::string> errors(xis.size());
  parallel_for(xis.size(), [&](std::size_t i) {
    try {
      bounds[i] = certified_bound(spec, xis[i], a.alpha);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });
  Table t({"index", "xi", "route", "leaf_route", "witness_energy", "formula_bound", "ratio", "constant_name",
           "holds"});
  std::size_t violations = 0;
  json trees = json::array();
  for (std::size_t i = 0; i < xis.size(); ++i) {
    if (!errors[i].empty()) {
      ++violations;
      t.add({i, xi_text(xis[i]), "error", errors[i], real(kInfinity), real(kInfinity), real(kInfinity), "", false});
      continue;
    }
    const CertifiedBound& b = bounds[i];
    const CertifiedBound* leaf = &b;
    while (!leaf->children.empty()) leaf = &leaf->children.front();
    const bool holds = b.holds_recursively();
    if (!holds) ++violations;
    const double ratio = b.formula_bound > 0.0 ? b.witness_energy / b.formula_bound : 0.0;
    t.add({i, xi_text(xis[i]), b.route, leaf->route, real(b.witness_energy), real(b.formula_bound), real(ratio),
           b.constant_name, holds});
    if (a.tree_depth > 0) trees.push_back(io::bound_to_json(b, a.tree_depth));
  }
  run.write_table("bounds", t);
  if (a.tree_depth > 0) run.write_json("bounds_tree.json", json{{"bounds", trees}});
  out << xis.size() << " matrices, " << violations << " violations\n";
  if (violations > 0) throw AssertionFailure(std::to_string(violations) + " bound violations");
  return kOk;
}

struct EnvelopeArgs {
  XiSource src;
  int level = 3;
  int restarts = 2;
  bool witness = false;
};

int cmd_envelope(Run& run, const EnvelopeArgs& a, std::ostream& out) {
  const StoredEnergySpec spec = run.load_spec();
  if (a.level > MeshSpace::kMaxLevel) throw ResourceGuard("--level exceeds 6");
  if (a.level < 0 || a.restarts < 0) throw InvalidArgument("--level and --restarts must be >= 0");
  const auto xis = a.src.resolve(spec.N, run.common().seed, true);
  std::vector<std::vector<EnvelopeEstimate>> res(xis.size());
  parallel_for(xis.size(), [&](std::size_t i) {
    res[i] = z_estimate_levels(spec, xis[i], a.level, a.restarts, derive_seed(run.common().seed, i));
  });
  Table t({"index", "xi", "level", "value", "method", "status", "start", "sweeps", "W", "seed"});
  bool monotone = true;
  json witnesses = json::array();
  for (std::size_t i = 0; i < xis.size(); ++i) {
    const double w = eval_W(spec, xis[i]);
    for (std::size_t L = 0; L < res[i].size(); ++L) {
      const EnvelopeEstimate& e = res[i][L];
      if (L > 0 && e.value > res[i][L - 1].value + 1e-10) monotone = false;
      t.add({i, xi_text(xis[i]), e.level, real(e.value), to_string(e.method), to_string(e.status), e.start, e.sweeps,
             real(w), e.seed});
    }
    if (a.witness) witnesses.push_back(io::witness_to_json(res[i].back().witness, &spec, &xis[i]));
  }
  run.write_table("envelope", t);
  if (a.witness) run.write_json("envelope_witness.json", json{{"witnesses", witnesses}});
  out << xis.size() << " matrices, levels 0.." << a.level << (monotone ? ", monotone\n" : ", NOT monotone\n");
  if (!monotone) throw AssertionFailure("nested-level monotonicity violated");
  return kOk;
}

struct Convexify1DArgs {
  std::size_t radii = 2048;
  double r_max = 10.0;
};

int cmd_convexify1d(Run& run, const Convexify1DArgs& a, std::ostream& out) {
  const StoredEnergySpec spec = run.load_spec();
  if (a.radii > kMaxGridPoints) throw ResourceGuard("--radii exceeds 10^6 points");
  const RadialEnvelope1D env = biconjugate_radial(spec, {a.radii, a.r_max});
  Table t({"r", "w", "W_biconjugate", "on_hull"});
  for (std::size_t k = 0; k < env.grid.size(); ++k) {
    const bool on = env.values[k] == env.w[k];
    t.add({env.grid[k], real(env.w[k]), real(env.values[k]), on});
  }
  run.write_table("convexify1d", t);
  const ConvexityReport cr = check_biconjugate(env);
  json bridges = json::array();
  for (const auto& b : env.bridges) bridges.push_back({{"a", b.a}, {"b", b.b}, {"w_a", b.wa}, {"w_b", b.wb}});
  run.write_json("convexify1d_hull.json", json{{"bridges", bridges},
                                               {"breakpoint_count", env.breakpoints.size()},
                                               {"W_biconjugate_at_0", real(env.at(0.0))},
                                               {"max_three_point_violation", cr.max_three_point_violation},
                                               {"max_excess_over_w", cr.max_excess_over_w}});
  out << "W**(0) = " << io::format_real(env.at(0.0)) << "\n";
  if (cr.max_three_point_violation > 1e-12 || cr.max_excess_over_w > 1e-12)
    throw AssertionFailure("biconjugate is not convex or exceeds w");
  return kOk;
}

struct Relax1DArgs {
  std::string A = "0,0,0";
  std::string levels = "1,2,3,4,5";
  int restarts = 2;
};

int cmd_relax1d(Run& run, const Relax1DArgs& a, std::ostream& out) {
  const StoredEnergySpec spec = run.load_spec();
  if (spec.N != 1) throw InvalidArgument("relax1d requires a spec with N = 1");
  const auto levels = parse_int_list(a.levels, "--levels");
  for (int L : levels)
    if (L > MeshSpace::kMaxLevel) throw ResourceGuard("--levels entry exceeds 6");
  const DeformationGradient A = parse_xi(a.A, 1);
  const Relax1DReport rep = relax_experiment_1d(spec, A, levels, a.restarts, run.common().seed);
  Table t({"level", "cells", "min_energy", "relaxed_min", "gap", "target", "recovery_energy", "lower_bound_ok"});
  bool ok = true;
  for (const auto& r : rep.rows) {
    ok = ok && r.lower_bound_ok;
    t.add({r.level, r.cells, real(r.nonconvex_min), real(r.relaxed_min), real(r.gap), real(rep.target),
           real(r.recovery_energy), r.lower_bound_ok});
  }
  run.write_table("relax1d", t);
  if (!rep.rows.empty()) out << "final gap " << io::format_real(rep.rows.back().gap) << "\n";
  if (!ok) throw AssertionFailure("discrete minimum below |Omega| W**(A)");
  return kOk;
}

struct RecoverArgs {
  std::string A;
  std::string ns = "1,2,4,8";
  int level = 3;
  int restarts = 2;
  double cover_tol = kDefaultCoverTol;
  double delta = 1e-9;
};

int cmd_recover(Run& run, const RecoverArgs& a, std::ostream& out) {
  const StoredEnergySpec spec = run.load_spec();
  if (a.level > MeshSpace::kMaxLevel) throw ResourceGuard("--level exceeds 6");
  const DeformationGradient A = a.A.empty() ? DeformationGradient(spec.N) : parse_xi(a.A, spec.N);
  const auto ns = parse_int_list(a.ns, "--ns");
  const EnvelopeEstimate est = z_estimate(spec, A, a.level, a.restarts, run.common().seed);
  PieceWitness pw{est.witness, est.value};
  std::string witness_kind = "mesh_estimate";
  if (est.value == kInfinity) {
    const MeshSpace mesh(spec.N, 0);
    pw = {mesh.to_witness(std::vector<Vec3>(mesh.node_count(), kZero3)), eval_W(spec, A)};
    witness_kind = "zero";
  }
  DomainPartition omega = MeshSpace(spec.N, 0).partition();
  const PiecewiseAffineMap u = affine_map(omega, BoundaryDatum{A, kZero3});
  std::vector<RecoverySequence> seq;
  for (int n : ns) {
    if (n < 1) throw InvalidArgument("--ns entries must be >= 1");
    seq.push_back(build_recovery(spec, u, std::vector<PieceWitness>(omega.cells.size(), pw), n, a.delta,
                                 a.cover_tol));
  }
  const WeakConvergenceReport w = weak_convergence_diagnostics(seq);
  Table t({"n", "energy", "ledger", "residual", "residual_bound", "sup_norm", "sup_ratio", "max_gradient", "witness"});
  bool ok = true;
  for (std::size_t k = 0; k < seq.size(); ++k) {
    const RecoverySequence& s = seq[k];
    const double slack = 1e-10 * std::max(1.0, std::abs(s.ledger));
    if (std::isfinite(s.ledger) && std::abs(s.energy - s.ledger) > s.residual_bound + slack) ok = false;
    t.add({s.n, real(s.energy), real(s.ledger), s.residual_measure, real(s.residual_bound), s.sup_norm,
           w.rows[k].sup_ratio, s.max_gradient, witness_kind});
  }
  run.write_table("recover", t);
  out << seq.size() << " sequences, ledger " << (w.ledger_fixed ? "fixed" : "varies") << "\n";
  if (!ok) throw AssertionFailure("ledger identity violated beyond the residual bound");
  return kOk;
}

struct WitnessArgs {
  std::string construction = "octahedron";
  std::string xi;
  double s = 2.0;
  double alpha = 1.0;
  int obj_component = -1;
};

int cmd_witness(Run& run, const WitnessArgs& a, std::ostream& out) {
  std::optional<StoredEnergySpec> spec;
  if (!run.common().spec_path.empty()) spec = run.load_spec();
  json j;
  PiecewiseAffineWitness w;
  auto need_spec = [&](int n) {
    if (!spec) throw ParseError("--spec is required for construction " + a.construction);
    if (spec->N != n) throw InvalidArgument(a.construction + " requires a spec with N = " + std::to_string(n));
  };
  if (a.construction == "octahedron") {
    DeformationGradient xi = a.xi.empty() ? DeformationGradient::from_columns({unit_vector(0), unit_vector(1),
                                                                               unit_vector(0)})
                                          : parse_xi(a.xi, 3);
    const Vec3 c = cross(xi.col(0), xi.col(1));
    const double c2 = dot(c, c);
    if (!(c2 > 0.0)) throw InvalidArgument("octahedron: xi_1 ^ xi_2 must be nonzero");
    const double lambda = dot(cross(xi.col(2), xi.col(1)), c) / c2;
    const double mu = dot(cross(xi.col(0), xi.col(2)), c) / c2;
    if (norm(xi.col(2) - (lambda * xi.col(0) + mu * xi.col(1))) > 1e-10 * (1.0 + xi.norm()))
      throw InvalidArgument("octahedron: xi_3 must lie in span(xi_1, xi_2)");
    StoredEnergySpec s3 = spec.value_or(StoredEnergySpec{});
    s3.N = 3;
    const OctaWitness ow = octa_witness_3d(s3, xi, lambda, mu, a.s);
    w = ow.witness;
    j = io::witness_to_json(w, spec ? &*spec : nullptr, spec ? &xi : nullptr);
    const auto& d = ow.det_expected;
    j["det_table"] = {{"a", d[0]}, {"b", d[1]}, {"c", d[2]}, {"d", d[3]}};
    j["det_abs"] = ow.det_abs;
    j["lambda"] = lambda;
    j["mu"] = mu;
    j["s"] = a.s;
    j["delta"] = ow.delta;
  } else if (a.construction == "laminate" || a.construction == "diamond" || a.construction == "square_split") {
    const int n = a.construction == "laminate" ? 1 : 2;
    need_spec(n);
    const DeformationGradient xi = a.xi.empty() ? DeformationGradient(n) : parse_xi(a.xi, n);
    const Construction c = a.construction == "laminate" ? laminate_1d(*spec, xi, a.alpha)
                           : a.construction == "diamond" ? diamond_2d(*spec, xi, a.alpha)
                                                         : square_split_2d(*spec, xi, a.alpha);
    w = c.witness;
    j = io::witness_to_json(w, &*spec, &xi);
    j["bound"] = io::bound_to_json(c.bound);
  } else {
    throw ParseError("unknown --construction " + a.construction);
  }
  j["construction"] = a.construction;
  j["check"] = [&] {
    const WitnessCheck chk = check_witness(w);
    return json{{"continuity_error", chk.continuity_error},
                {"boundary_error", chk.boundary_error},
                {"volume_error", chk.volume_error},
                {"ok", chk.ok}};
  }();
  run.write_json("witness.json", j);
  if (a.obj_component >= 0) {
    if (a.obj_component > 2) throw InvalidArgument("--obj-component must be 0, 1 or 2");
    const DomainPartition& p = w.partition();
    if (p.dim == 3) throw InvalidArgument("--obj-component: graphs are emitted for 1D and 2D witnesses only");
    std::ostringstream os;
    os << "# graph of phi component " << a.obj_component << "\n";
    for (std::size_t v = 0; v < p.vertices.size(); ++v) {
      const double z = w.nodal_values()[v][a.obj_component];
      if (p.dim == 1)
        os << "v " << io::format_real(p.vertices[v][0]) << ' ' << io::format_real(z) << " 0\n";
      else
        os << "v " << io::format_real(p.vertices[v][0]) << ' ' << io::format_real(p.vertices[v][1]) << ' '
           << io::format_real(z) << '\n';
    }
    for (const auto& cell : p.cells) {
      os << (p.dim == 1 ? "l" : "f");
      for (int v : cell) os << ' ' << v + 1;
      os << '\n';
    }
    run.write_text("witness.obj", os.str());
  }
  out << a.construction << ": " << w.cell_count() << " cells\n";
  if (!j["check"]["ok"].get<bool>()) throw AssertionFailure("witness check failed");
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"relaxlab: certified bounds and numerical estimates of quasiconvex envelopes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  Common common;
  CheckArgs check_args;
  BoundsArgs bounds_args;
  EnvelopeArgs env_args;
  Convexify1DArgs cvx_args;
  Relax1DArgs relax_args;
  RecoverArgs rec_args;
  WitnessArgs wit_args;

  auto* check = app.add_subcommand("check", "Certify the growth conditions of a spec");
  add_common(check, common);
  check->add_option("--alpha", check_args.alpha, "alpha for C1/C2");
  check->add_option("--deltas", check_args.deltas, "Comma-separated delta list for C3");
  check->add_option("--trials", check_args.trials, "Frame-invariance trials for C4");
  check->add_option("--samples", check_args.samples, "Samples per certifier");

  auto* bounds = app.add_subcommand("bounds", "Construction route, witness energy and formula bound per matrix");
  add_common(bounds, common);
  add_xi_source(bounds, bounds_args.src);
  bounds->add_option("--alpha", bounds_args.alpha, "alpha for the 1D/2D constructions");
  bounds->add_option("--tree-depth", bounds_args.tree_depth, "Also write bound trees to this depth");

  auto* envelope = app.add_subcommand("envelope", "Mesh estimates of ZW at levels 0..level");
  add_common(envelope, common);
  add_xi_source(envelope, env_args.src);
  envelope->add_option("--level", env_args.level, "Finest dyadic level (<= 6)");
  envelope->add_option("--restarts", env_args.restarts, "Random restarts per level");
  envelope->add_flag("--witness", env_args.witness, "Write the finest witness as JSON");

  auto* convexify = app.add_subcommand("convexify1d", "Convex envelope W** of a 1D spec");
  add_common(convexify, common);
  convexify->add_option("--radii", cvx_args.radii, "Number of grid radii");
  convexify->add_option("--rmax", cvx_args.r_max, "Largest grid radius");

  auto* relax1d = app.add_subcommand("relax1d", "Discrete and relaxed minima on (0,1) with u(1) = A");
  add_common(relax1d, common);
  relax1d->add_option("--A", relax_args.A, "Boundary gradient, 3 entries");
  relax1d->add_option("--levels", relax_args.levels, "Comma-separated mesh levels");
  relax1d->add_option("--restarts", relax_args.restarts, "Random restarts per level");

  auto* recover = app.add_subcommand("recover", "Recovery sequence ledger for an affine base map");
  add_common(recover, common);
  recover->add_option("--A", rec_args.A, "Gradient of the affine base map (default 0)");
  recover->add_option("--ns", rec_args.ns, "Comma-separated list of n");
  recover->add_option("--level", rec_args.level, "Mesh level of the planted witness");
  recover->add_option("--restarts", rec_args.restarts, "Random restarts for the witness estimate");
  recover->add_option("--cover-tol", rec_args.cover_tol, "Vitali cover tolerance");
  recover->add_option("--delta", rec_args.delta, "Allowed total witness gap");

  auto* witness = app.add_subcommand("witness", "Export a construction witness as JSON");
  add_common(witness, common);
  witness->add_option("--construction", wit_args.construction, "octahedron, laminate, diamond or square_split")
      ->check(CLI::IsMember({"octahedron", "laminate", "diamond", "square_split"}));
  witness->add_option("--xi", wit_args.xi, "Matrix the witness is built for");
  witness->add_option("--s", wit_args.s, "Octahedron slope");
  witness->add_option("--alpha", wit_args.alpha, "alpha for the 1D/2D constructions");
  witness->add_option("--obj-component", wit_args.obj_component, "Also write the graph of this component of phi");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  std::vector<std::string> args(argv + 1, argv + argc);
  std::optional<Run> r;
  auto finish = [&](int code, const std::string& message) {
    if (r) {
      try {
        r->write_manifest(code, message);
      } catch (const std::exception& e) {
        err << "cannot write manifest: " << e.what() << "\n";
        if (code == kOk) code = kAssertion;
      }
    }
    return code;
  };
  try {
    r.emplace(sub->get_name(), common, args);
    if (sub == check) return finish(cmd_check(*r, check_args, out), "");
    if (sub == bounds) return finish(cmd_bounds(*r, bounds_args, out), "");
    if (sub == envelope) return finish(cmd_envelope(*r, env_args, out), "");
    if (sub == convexify) return finish(cmd_convexify1d(*r, cvx_args, out), "");
    if (sub == relax1d) return finish(cmd_relax1d(*r, relax_args, out), "");
    if (sub == recover) return finish(cmd_recover(*r, rec_args, out), "");
    return finish(cmd_witness(*r, wit_args, out), "");
  } catch (const AssertionFailure& e) {
    err << "assertion failed: " << e.what() << "\n";
    return finish(kAssertion, e.what());
  } catch (const ResourceGuard& e) {
    err << "resource guard: " << e.what() << "\n";
    return finish(kResource, e.what());
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return finish(kInput, e.what());
  } catch (const InvalidArgument& e) {
    err << "input error: " << e.what() << "\n";
    return finish(kInput, e.what());
  } catch (const DimensionMismatch& e) {
    err << "input error: " << e.what() << "\n";
    return finish(kInput, e.what());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return finish(kAssertion, e.what());
  }
}

}  // namespace relaxlab::cli
