#ifndef RELAXLAB_IO_HPP
#define RELAXLAB_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "relaxlab/constructions.hpp"
#include "relaxlab/energy.hpp"
#include "relaxlab/witness.hpp"

namespace relaxlab::io {

using nlohmann::json;

/// {"N":3, "p":2.0, "profile":{"kind":"inverse_power","s":1.0[, "scale":1.0]}}
/// Table profiles use {"kind":"table","points":[[t,h],...]}; throws ParseError.
StoredEnergySpec parse_spec(const json& j);
StoredEnergySpec load_spec(const std::filesystem::path& path);
json spec_to_json(const StoredEnergySpec& spec);

/// Row-major nested array with 3 rows of N entries.
json matrix_to_json(const DeformationGradient& xi);
/// Accepts nested rows (3 x N) or a flat array of 3N row-major entries;
/// N is required for the flat form. Throws ParseError.
DeformationGradient matrix_from_json(const json& j, int n_cols = 0);
/// Parses a JSON matrix literal.
DeformationGradient parse_matrix(const std::string& text, int n_cols = 0);

/// Reals that may be +inf serialise as the string "inf".
json real_to_json(double x);

json certificate_to_json(const ConditionCertificate& c);
json bound_to_json(const CertifiedBound& b, int max_depth = 8);
json partition_to_json(const DomainPartition& p);
json witness_to_json(const PiecewiseAffineWitness& w, const StoredEnergySpec* spec = nullptr,
                     const DeformationGradient* xi = nullptr);

/// Shortest round-trip decimal form of a double ("inf" for +inf).
std::string format_real(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add_meta(const std::string& key, const std::string& value);
  void add_row(std::vector<std::string> row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes to a temporary sibling and renames it into place.
void atomic_write(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace relaxlab::io

#endif  // RELAXLAB_IO_HPP
