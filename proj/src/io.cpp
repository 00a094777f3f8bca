#include "relaxlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "relaxlab/errors.hpp"

namespace relaxlab::io {

namespace {

double require_number(const json& j, const char* key) {
  if (!j.contains(key)) throw ParseError(std::string("spec: missing \"") + key + "\"");
  if (!j.at(key).is_number()) throw ParseError(std::string("spec: \"") + key + "\" must be a number");
  return j.at(key).get<double>();
}

}  // namespace

StoredEnergySpec parse_spec(const json& j) {
  if (!j.is_object()) throw ParseError("spec: expected a JSON object");
  StoredEnergySpec spec;
  const double n = require_number(j, "N");
  if (n != std::floor(n)) throw ParseError("spec: N must be an integer");
  spec.N = static_cast<int>(n);
  spec.p = require_number(j, "p");
  if (j.contains("frame")) {
    if (!j.at("frame").is_boolean()) throw ParseError("spec: \"frame\" must be a boolean");
    spec.frame = j.at("frame").get<bool>();
  }
  if (!j.contains("profile") || !j.at("profile").is_object()) throw ParseError("spec: missing \"profile\" object");
  const json& pr = j.at("profile");
  if (!pr.contains("kind") || !pr.at("kind").is_string()) throw ParseError("spec: profile needs a \"kind\"");
  const std::string kind = pr.at("kind").get<std::string>();
  try {
    if (kind == "inverse_power") {
      const double s = require_number(pr, "s");
      const double scale = pr.contains("scale") ? require_number(pr, "scale") : 1.0;
      spec.profile = SingularProfile::inverse_power(s, scale);
    } else if (kind == "table") {
      if (!pr.contains("points") || !pr.at("points").is_array()) throw ParseError("spec: table needs \"points\"");
      std::vector<std::pair<double, double>> nodes;
      for (const auto& pt : pr.at("points")) {
        if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number())
          throw ParseError("spec: table points are [t, h] pairs");
        nodes.emplace_back(pt[0].get<double>(), pt[1].get<double>());
      }
      spec.profile = SingularProfile::table(std::move(nodes));
    } else if (kind == "none") {
      spec.profile = SingularProfile::none();
    } else {
      throw ParseError("spec: unknown profile kind \"" + kind + "\"");
    }
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw ParseError(e.what());
  }
  return spec;
}

StoredEnergySpec load_spec(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error& e) {
    throw ParseError(e.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("spec: ") + e.what());
  }
  return parse_spec(j);
}

json spec_to_json(const StoredEnergySpec& spec) {
  json pr;
  switch (spec.profile.kind()) {
    case ProfileKind::InversePower:
      pr = {{"kind", "inverse_power"}, {"s", spec.profile.exponent()}, {"scale", spec.profile.scale()}};
      break;
    case ProfileKind::Table: {
      json pts = json::array();
      for (const auto& [t, h] : spec.profile.nodes()) pts.push_back({t, h});
      pr = {{"kind", "table"}, {"points", pts}};
      break;
    }
    case ProfileKind::None:
      pr = {{"kind", "none"}};
      break;
  }
  return {{"N", spec.N}, {"p", spec.p}, {"profile", pr}, {"frame", spec.frame}};
}

json real_to_json(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  return x;
}

json matrix_to_json(const DeformationGradient& xi) {
  json rows = json::array();
  for (int i = 0; i < 3; ++i) {
    json r = json::array();
    for (int j = 0; j < xi.cols(); ++j) r.push_back(xi(i, j));
    rows.push_back(r);
  }
  return rows;
}

DeformationGradient matrix_from_json(const json& j, int n_cols) {
  if (!j.is_array()) throw ParseError("matrix: expected an array");
  std::vector<double> flat;
  int n = n_cols;
  if (j.size() == 3 && j[0].is_array()) {
    n = static_cast<int>(j[0].size());
    for (const auto& row : j) {
      if (!row.is_array() || static_cast<int>(row.size()) != n) throw ParseError("matrix: ragged rows");
      for (const auto& v : row) {
        if (!v.is_number()) throw ParseError("matrix: entries must be numbers");
        flat.push_back(v.get<double>());
      }
    }
  } else {
    for (const auto& v : j) {
      if (!v.is_number()) throw ParseError("matrix: entries must be numbers");
      flat.push_back(v.get<double>());
    }
    if (n == 0) n = static_cast<int>(flat.size() / 3);
  }
  if (n < 1 || n > 3 || static_cast<int>(flat.size()) != 3 * n)
    throw ParseError("matrix: expected 3 rows of 1 to 3 entries");
  if (n_cols != 0 && n != n_cols)
    throw ParseError("matrix: has " + std::to_string(n) + " columns, expected " + std::to_string(n_cols));
  for (double v : flat)
    if (!std::isfinite(v)) throw ParseError("matrix: entries must be finite");
  return DeformationGradient::from_row_major(n, flat);
}

DeformationGradient parse_matrix(const std::string& text, int n_cols) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("matrix: ") + e.what());
  }
  return matrix_from_json(j, n_cols);
}

json certificate_to_json(const ConditionCertificate& c) {
  json cod = json::array();
  for (const auto& [d, v] : c.c_of_delta) cod.push_back({{"delta", d}, {"c_delta", real_to_json(v)}});
  json j = {{"kind", to_string(c.kind)},
            {"verified_by", to_string(c.verified_by)},
            {"sample_count", c.sample_count},
            {"worst_ratio", real_to_json(c.worst_ratio)},
            {"passed", c.passed}};
  if (c.kind == ConditionKind::C1 || c.kind == ConditionKind::C2) {
    j["alpha"] = c.alpha;
    j["beta"] = real_to_json(c.beta);
  }
  if (c.kind == ConditionKind::C3) j["c_of_delta"] = cod;
  if (!c.violation.empty()) j["violation"] = c.violation;
  return j;
}

json bound_to_json(const CertifiedBound& b, int max_depth) {
  json j = {{"route", b.route},
            {"xi", matrix_to_json(b.xi)},
            {"witness_energy", real_to_json(b.witness_energy)},
            {"formula_bound", real_to_json(b.formula_bound)},
            {"constant", real_to_json(b.constant)},
            {"constant_name", b.constant_name},
            {"det_margin", real_to_json(b.det_margin)},
            {"holds", b.holds()}};
  if (!b.children.empty()) {
    if (max_depth > 0) {
      json ch = json::array();
      for (const auto& c : b.children) ch.push_back(bound_to_json(c, max_depth - 1));
      j["children"] = ch;
    } else {
      j["children_omitted"] = b.children.size();
    }
  }
  return j;
}

json partition_to_json(const DomainPartition& p) {
  json verts = json::array();
  for (const auto& v : p.vertices) {
    json row = json::array();
    for (int i = 0; i < p.dim; ++i) row.push_back(v[i]);
    verts.push_back(row);
  }
  json j = {{"dim", p.dim},
            {"domain", to_string(p.domain)},
            {"vertices", verts},
            {"boundary", p.on_boundary},
            {"cells", p.cells},
            {"domain_volume", p.domain_volume()}};
  if (p.domain == DomainId::Octahedron) j["s"] = p.slope;
  return j;
}

json witness_to_json(const PiecewiseAffineWitness& w, const StoredEnergySpec* spec, const DeformationGradient* xi) {
  json vals = json::array();
  for (const auto& v : w.nodal_values()) vals.push_back({v[0], v[1], v[2]});
  json cells = json::array();
  for (std::size_t c = 0; c < w.cell_count(); ++c) {
    json cell = {{"gradient", matrix_to_json(w.gradient(c))},
                 {"volume", w.partition().cell_volume(c)}};
    if (spec && xi) cell["energy"] = real_to_json(eval_W(*spec, *xi + w.gradient(c)));
    cells.push_back(cell);
  }
  const Vec3 b = w.base_point_value();
  json j = {{"partition", partition_to_json(w.partition())},
            {"nodal_values", vals},
            {"cells", cells},
            {"base_point_value", {b[0], b[1], b[2]}}};
  if (spec && xi) j["witness_energy"] = real_to_json(witness_energy(*spec, *xi, w));
  return j;
}

std::string format_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void CsvTable::add_meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw InvalidArgument("csv: row width differs from header");
  rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::ostringstream os;
  for (const auto& [k, v] : meta_) os << "# " << k << ": " << v << '\n';
  auto put = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) os << ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (quote) {
        os << '"';
        for (char ch : cells[i]) os << (ch == '"' ? "\"\"" : std::string(1, ch));
        os << '"';
      } else {
        os << cells[i];
      }
    }
    os << '\n';
  };
  put(header_);
  for (const auto& r : rows_) put(r);
  return os.str();
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error("rename " + tmp.string() + " -> " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace relaxlab::io
