#include "gfgr/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

namespace gfgr::io {

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_field(fields[i]);
  }
  out_ << "\r\n";
}

void CsvWriter::header(std::initializer_list<const char*> names) {
  row(std::vector<std::string>(names.begin(), names.end()));
}

void write_trajectory_csv(std::ostream& out, const TrajectoryRecord& traj) {
  CsvWriter csv(out);
  const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().rows();
  std::vector<std::string> head{"time"};
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const std::string stem = "rho_" + std::to_string(i) + "_" + std::to_string(j);
      head.push_back(stem + "_re");
      head.push_back(stem + "_im");
    }
  for (const char* c : {"trace", "min_eigenvalue", "entropy", "purity"}) head.emplace_back(c);
  csv.row(head);
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::vector<std::string> r{format_number(traj.times[k])};
    const Matrix& rho = traj.states[k];
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        r.push_back(format_number(rho(i, j).real()));
        r.push_back(format_number(rho(i, j).imag()));
      }
    const SnapshotDiagnostics& d = traj.diagnostics[k];
    for (double v : {d.trace, d.min_eigenvalue, d.entropy, d.purity}) r.push_back(format_number(v));
    csv.row(r);
  }
}

void write_trajectory_ndjson(std::ostream& out, const TrajectoryRecord& traj) {
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const Matrix& rho = traj.states[k];
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < rho.rows(); ++i) {
      nlohmann::json row_re = nlohmann::json::array();
      nlohmann::json row_im = nlohmann::json::array();
      for (Eigen::Index j = 0; j < rho.cols(); ++j) {
        row_re.push_back(number_or_null(rho(i, j).real()));
        row_im.push_back(number_or_null(rho(i, j).imag()));
      }
      re.push_back(std::move(row_re));
      im.push_back(std::move(row_im));
    }
    const SnapshotDiagnostics& d = traj.diagnostics[k];
    nlohmann::json line = {{"time", traj.times[k]},
                           {"rho_re", std::move(re)},
                           {"rho_im", std::move(im)},
                           {"trace", number_or_null(d.trace)},
                           {"min_eigenvalue", number_or_null(d.min_eigenvalue)},
                           {"entropy", number_or_null(d.entropy)},
                           {"purity", number_or_null(d.purity)}};
    out << line.dump() << '\n';
  }
}

void write_rate_tensor_csv(std::ostream& out, const RateTensor& tensor) {
  CsvWriter csv(out);
  csv.header({"lambda1", "lambda2", "lambda1p", "lambda2p", "re", "im"});
  const std::size_t n = tensor.dim();
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t d = 0; d < n; ++d) {
          const Complex v = tensor(a, b, c, d);
          csv.row({std::to_string(a), std::to_string(b), std::to_string(c), std::to_string(d),
                   format_number(v.real()), format_number(v.imag())});
        }
}

void write_semiclassical_csv(std::ostream& out, const SemiclassicalRates& rates) {
  CsvWriter csv(out);
  csv.header({"lambda", "lambda_p", "rate"});
  const auto n = rates.rates.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      csv.row({std::to_string(i), std::to_string(j), format_number(rates.rates(i, j))});
}

void write_positivity_csv(std::ostream& out, const TrajectoryRecord& traj,
                          const PositivityAudit& audit) {
  CsvWriter csv(out);
  csv.header({"time", "min_eigenvalue", "violation"});
  for (std::size_t k = 0; k < traj.size(); ++k) {
    const double m = audit.min_eigenvalues[k];
    csv.row({format_number(traj.times[k]), format_number(m), m < audit.threshold ? "1" : "0"});
  }
}

void write_t3_csv(std::ostream& out, const std::vector<std::string>& labels,
                  const std::vector<double>& t_bars, const std::vector<T3Report>& reports) {
  CsvWriter csv(out);
  csv.header({"generator", "t_bar", "t3_norm", "population_from_coherence",
              "coherence_from_population", "t1_rate", "t2_rate"});
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const T3Report& r = reports[k];
    csv.row({labels[k], format_number(t_bars[k]), format_number(r.t3_norm),
             format_number(r.population_from_coherence),
             format_number(r.coherence_from_population), format_number(r.t1_rate),
             format_number(r.t2_rate)});
  }
}

void write_generator_audit_csv(std::ostream& out, const std::vector<GeneratorAudit>& audits) {
  CsvWriter csv(out);
  csv.header({"kind_a", "kind_b", "spectral_distance", "frobenius_distance",
              "population_from_population", "population_from_coherence",
              "coherence_from_population", "coherence_from_coherence"});
  for (const GeneratorAudit& a : audits) {
    csv.row({a.kind_a, a.kind_b, format_number(a.spectral_distance),
             format_number(a.frobenius_distance), format_number(a.population_from_population),
             format_number(a.population_from_coherence),
             format_number(a.coherence_from_population),
             format_number(a.coherence_from_coherence)});
  }
}

void write_convergence_csv(std::ostream& out, const ConvergenceTable& table) {
  CsvWriter csv(out);
  csv.header({"eps_bar", "spacing", "bandwidth", "total_rate", "out_rate_excluding_self",
              "golden_rule_rate", "relative_error", "relative_error_excluding_self",
              "error_defined", "scale_separated", "resolves_discreteness"});
  for (const ConvergenceRow& r : table.rows) {
    csv.row({format_number(r.eps_bar), format_number(r.spacing), format_number(r.bandwidth),
             format_number(r.total_rate), format_number(r.out_rate_excluding_self),
             format_number(r.golden_rule_rate), format_number(r.relative_error),
             format_number(r.relative_error_excluding_self), r.error_defined ? "1" : "0",
             r.scale_separated ? "1" : "0", r.resolves_discreteness ? "1" : "0"});
  }
}

void write_convergence_ndjson(std::ostream& out, const ConvergenceTable& table) {
  for (const ConvergenceRow& r : table.rows) {
    nlohmann::json line = {{"eps_bar", r.eps_bar},
                           {"spacing", r.spacing},
                           {"bandwidth", r.bandwidth},
                           {"total_rate", r.total_rate},
                           {"out_rate_excluding_self", r.out_rate_excluding_self},
                           {"golden_rule_rate", r.golden_rule_rate},
                           {"relative_error", number_or_null(r.relative_error)},
                           {"relative_error_excluding_self",
                            number_or_null(r.relative_error_excluding_self)},
                           {"error_defined", r.error_defined},
                           {"scale_separated", r.scale_separated},
                           {"resolves_discreteness", r.resolves_discreteness}};
    out << line.dump() << '\n';
  }
}

void write_scan_csv(std::ostream& out, const ScanReport& report) {
  CsvWriter csv(out);
  csv.header({"g", "t_bar", "t_ref", "xi", "distance_rescaled", "distance_unscaled"});
  for (const ScanRow& r : report.rows) {
    csv.row({format_number(r.g), format_number(r.t_bar), format_number(report.t_ref),
             format_number(report.xi), format_number(r.distance_rescaled),
             format_number(r.distance_unscaled)});
  }
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256: digest failed");
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < len; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << contents;
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace gfgr::io
