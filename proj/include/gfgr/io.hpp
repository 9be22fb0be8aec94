#pragma once

#include <filesystem>
#include <initializer_list>
#include <ostream>
#include <string>
#include <vector>

#include "gfgr/diagnostics.hpp"
#include "gfgr/evolve.hpp"
#include "gfgr/superop.hpp"

namespace gfgr::io {

// Shortest round-trip decimal form ("%.17g"); identical input gives identical text.
std::string format_number(double v);

// RFC-4180 field quoting: fields containing a comma, quote, CR or LF are
// wrapped in double quotes with embedded quotes doubled.
std::string csv_field(const std::string& s);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}
  void row(const std::vector<std::string>& fields);
  void header(std::initializer_list<const char*> names);

 private:
  std::ostream& out_;
};

// time, rho_<i>_<j>_re, rho_<i>_<j>_im (row-major), trace, min_eigenvalue, entropy, purity
void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& traj);
// one JSON object per snapshot
void write_trajectory_ndjson(std::ostream& out, const TrajectoryRecord& traj);

// lambda1, lambda2, lambda1p, lambda2p, re, im
void write_rate_tensor_csv(std::ostream& out, const RateTensor& tensor);
// lambda, lambda_p, rate
void write_semiclassical_csv(std::ostream& out, const SemiclassicalRates& rates);

void write_positivity_csv(std::ostream& out, const TrajectoryRecord& traj,
                          const PositivityAudit& audit);
void write_t3_csv(std::ostream& out, const std::vector<std::string>& labels,
                  const std::vector<double>& t_bars, const std::vector<T3Report>& reports);
void write_generator_audit_csv(std::ostream& out, const std::vector<GeneratorAudit>& audits);
void write_convergence_csv(std::ostream& out, const ConvergenceTable& table);
void write_convergence_ndjson(std::ostream& out, const ConvergenceTable& table);
void write_scan_csv(std::ostream& out, const ScanReport& report);

// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
// Writes through a string buffer; throws IoError on failure.
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace gfgr::io
