#include "gfgr/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "gfgr/io.hpp"
#include "gfgr/projection.hpp"

namespace gfgr {

namespace {

std::string kind_label(ScenarioErrorKind k) {
  switch (k) {
    case ScenarioErrorKind::kSyntax:
      return "syntax";
    case ScenarioErrorKind::kMissingField:
      return "missing field";
    case ScenarioErrorKind::kNotHermitian:
      return "not Hermitian";
    case ScenarioErrorKind::kInvalidValue:
      return "invalid value";
  }
  return "invalid value";
}

std::string summarize(const std::vector<ScenarioDiagnostic>& diags) {
  std::ostringstream os;
  os << "scenario rejected:";
  for (const auto& d : diags) {
    os << "\n  " << d.path << ": " << kind_label(d.kind) << ": " << d.reason;
  }
  return os.str();
}

bool matrices_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

std::string describe(Complex z) {
  std::ostringstream os;
  os.precision(6);
  os << "(" << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i)";
  return os.str();
}

// Collects diagnostics while walking the YAML tree.
class Loader {
 public:
  std::vector<ScenarioDiagnostic> diags;

  void fail(ScenarioErrorKind kind, std::string path, std::string reason) {
    diags.push_back({kind, std::move(path), std::move(reason)});
  }

  void check_keys(const YAML::Node& node, const std::string& path,
                  std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) return;
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
        fail(ScenarioErrorKind::kInvalidValue, join(path, key), "unknown field");
      }
    }
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

  YAML::Node required(const YAML::Node& parent, const std::string& path, const char* key) {
    if (!parent.IsMap() || !parent[key]) {
      fail(ScenarioErrorKind::kMissingField, join(path, key), "required field is missing");
      return YAML::Node(YAML::NodeType::Undefined);
    }
    return parent[key];
  }

  std::optional<double> number(const YAML::Node& n, const std::string& path) {
    if (!n || !n.IsScalar()) {
      fail(ScenarioErrorKind::kInvalidValue, path, "expected a number");
      return std::nullopt;
    }
    try {
      const double v = n.as<double>();
      if (!std::isfinite(v)) {
        fail(ScenarioErrorKind::kInvalidValue, path, "number must be finite");
        return std::nullopt;
      }
      return v;
    } catch (const YAML::Exception&) {
      fail(ScenarioErrorKind::kInvalidValue, path, "expected a number");
      return std::nullopt;
    }
  }

  std::optional<std::uint64_t> unsigned_integer(const YAML::Node& n, const std::string& path) {
    try {
      if (n && n.IsScalar()) {
        const auto text = n.as<std::string>();
        if (!text.empty() && text.find_first_not_of("0123456789") == std::string::npos) {
          return n.as<std::uint64_t>();
        }
      }
    } catch (const YAML::Exception&) {
    }
    fail(ScenarioErrorKind::kInvalidValue, path, "expected a non-negative integer");
    return std::nullopt;
  }

  std::optional<bool> boolean(const YAML::Node& n, const std::string& path) {
    try {
      if (n && n.IsScalar()) return n.as<bool>();
    } catch (const YAML::Exception&) {
    }
    fail(ScenarioErrorKind::kInvalidValue, path, "expected true or false");
    return std::nullopt;
  }

  std::optional<std::string> string(const YAML::Node& n, const std::string& path) {
    if (n && n.IsScalar()) return n.as<std::string>();
    fail(ScenarioErrorKind::kInvalidValue, path, "expected a string");
    return std::nullopt;
  }

  std::vector<double> numbers(const YAML::Node& n, const std::string& path) {
    std::vector<double> out;
    if (!n || !n.IsSequence()) {
      fail(ScenarioErrorKind::kInvalidValue, path, "expected a list of numbers");
      return out;
    }
    for (std::size_t i = 0; i < n.size(); ++i) {
      if (auto v = number(n[i], path + "[" + std::to_string(i) + "]")) out.push_back(*v);
    }
    return out;
  }

  std::optional<Complex> complex_entry(const YAML::Node& n, const std::string& path) {
    if (n && n.IsSequence()) {
      if (n.size() != 2) {
        fail(ScenarioErrorKind::kInvalidValue, path, "complex entries are [re, im] pairs");
        return std::nullopt;
      }
      auto re = number(n[0], path + "[0]");
      auto im = number(n[1], path + "[1]");
      if (re && im) return Complex(*re, *im);
      return std::nullopt;
    }
    if (auto re = number(n, path)) return Complex(*re, 0.0);
    return std::nullopt;
  }

  // Rows of entries; each entry is [re, im] or a bare real number.
  std::optional<Matrix> matrix(const YAML::Node& n, const std::string& path) {
    if (!n || !n.IsSequence() || n.size() == 0) {
      fail(ScenarioErrorKind::kInvalidValue, path, "expected a non-empty list of rows");
      return std::nullopt;
    }
    const auto rows = static_cast<Eigen::Index>(n.size());
    Matrix m(rows, rows);
    bool ok = true;
    for (Eigen::Index i = 0; i < rows; ++i) {
      const std::string row_path = path + "[" + std::to_string(i) + "]";
      const YAML::Node row = n[static_cast<std::size_t>(i)];
      if (!row.IsSequence() || static_cast<Eigen::Index>(row.size()) != rows) {
        fail(ScenarioErrorKind::kInvalidValue, row_path,
             "matrix must be square with " + std::to_string(rows) + " entries per row");
        ok = false;
        continue;
      }
      for (Eigen::Index j = 0; j < rows; ++j) {
        auto z = complex_entry(row[static_cast<std::size_t>(j)],
                               row_path + "[" + std::to_string(j) + "]");
        if (z) {
          m(i, j) = *z;
        } else {
          ok = false;
        }
      }
    }
    if (!ok) return std::nullopt;
    return m;
  }

  // {matrix: ...} | {diagonal: [...]} | {pure: [entries]} |
  // {spectrum: [...], vectors: matrix with eigenvectors as columns}
  std::optional<Matrix> state(const YAML::Node& n, const std::string& path) {
    if (!n || !n.IsMap()) {
      fail(ScenarioErrorKind::kInvalidValue, path,
           "expected one of matrix / diagonal / pure / spectrum+vectors");
      return std::nullopt;
    }
    check_keys(n, path, {"matrix", "diagonal", "pure", "spectrum", "vectors"});
    if (n["matrix"]) return matrix(n["matrix"], path + ".matrix");
    if (n["diagonal"]) {
      const auto d = numbers(n["diagonal"], path + ".diagonal");
      if (d.empty()) return std::nullopt;
      Matrix m = Matrix::Zero(static_cast<Eigen::Index>(d.size()),
                              static_cast<Eigen::Index>(d.size()));
      for (std::size_t i = 0; i < d.size(); ++i) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = d[i];
      }
      return m;
    }
    if (n["pure"]) {
      const YAML::Node p = n["pure"];
      if (!p.IsSequence() || p.size() == 0) {
        fail(ScenarioErrorKind::kInvalidValue, path + ".pure", "expected a list of amplitudes");
        return std::nullopt;
      }
      ComplexVector psi(static_cast<Eigen::Index>(p.size()));
      for (std::size_t i = 0; i < p.size(); ++i) {
        auto z = complex_entry(p[i], path + ".pure[" + std::to_string(i) + "]");
        if (!z) return std::nullopt;
        psi(static_cast<Eigen::Index>(i)) = *z;
      }
      if (psi.norm() == 0.0) {
        fail(ScenarioErrorKind::kInvalidValue, path + ".pure", "zero state vector");
        return std::nullopt;
      }
      psi.normalize();
      return Matrix(psi * psi.adjoint());
    }
    if (n["spectrum"]) {
      const auto p = numbers(n["spectrum"], path + ".spectrum");
      if (p.empty()) return std::nullopt;
      const auto d = static_cast<Eigen::Index>(p.size());
      Matrix vecs = Matrix::Identity(d, d);
      if (n["vectors"]) {
        auto v = matrix(n["vectors"], path + ".vectors");
        if (!v) return std::nullopt;
        if (v->rows() != d) {
          fail(ScenarioErrorKind::kInvalidValue, path + ".vectors",
               "vectors must be a square matrix matching the spectrum length");
          return std::nullopt;
        }
        vecs = *v;
      }
      Matrix m = Matrix::Zero(d, d);
      for (Eigen::Index k = 0; k < d; ++k) {
        m += p[static_cast<std::size_t>(k)] * vecs.col(k) * vecs.col(k).adjoint();
      }
      return m;
    }
    fail(ScenarioErrorKind::kMissingField, path,
         "expected one of matrix / diagonal / pure / spectrum+vectors");
    return std::nullopt;
  }
};

std::optional<GeneratorKind> parse_generator_kind(const std::string& s) {
  if (s == "gfgr") return GeneratorKind::kGfgr;
  if (s == "conventional") return GeneratorKind::kConventional;
  if (s == "conventional_kernel") return GeneratorKind::kConventionalKernel;
  if (s == "projected") return GeneratorKind::kProjected;
  return std::nullopt;
}

std::optional<Method> parse_method(const std::string& s) {
  if (s == "exact-exponential") return Method::kExactExponential;
  if (s == "rk4") return Method::kRk4;
  if (s == "adaptive") return Method::kAdaptive;
  if (s == "auto") return Method::kAuto;
  return std::nullopt;
}

void check_hermitian(Loader& ld, const Matrix& m, const std::string& path, const char* what,
                     double tol) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = i; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - std::conj(m(j, i))) > tol) {
        ld.fail(ScenarioErrorKind::kNotHermitian,
                path + "[" + std::to_string(i) + "][" + std::to_string(j) + "]",
                std::string(what) + " not Hermitian: entry (" + std::to_string(i) + "," +
                    std::to_string(j) + ") = " + describe(m(i, j)) + " but conj of (" +
                    std::to_string(j) + "," + std::to_string(i) + ") = " +
                    describe(std::conj(m(j, i))));
        return;
      }
    }
  }
}

void check_state(Loader& ld, const Matrix& m, std::size_t dim, const std::string& path,
                 const Tolerances& tol) {
  if (static_cast<std::size_t>(m.rows()) != dim) {
    ld.fail(ScenarioErrorKind::kInvalidValue, path,
            "state has dimension " + std::to_string(m.rows()) + ", expected " +
                std::to_string(dim));
    return;
  }
  const ValidationReport r = validate_state(m, tol);
  if (!r.hermitian) {
    check_hermitian(ld, m, path, "state", tol.hermiticity);
  } else if (!r.unit_trace) {
    ld.fail(ScenarioErrorKind::kInvalidValue, path, "state trace is not 1");
  } else if (!r.positive) {
    ld.fail(ScenarioErrorKind::kInvalidValue, path,
            "state has a negative eigenvalue " + std::to_string(r.min_eigenvalue));
  }
}

void collect_validation(Loader& ld, const Scenario& s) {
  static const std::regex stem(R"([A-Za-z0-9_][A-Za-z0-9._-]*)");
  if (!std::regex_match(s.name, stem)) {
    ld.fail(ScenarioErrorKind::kInvalidValue, "name",
            "scenario name must be a valid file stem ([A-Za-z0-9._-], not starting with '.')");
  }
  if (!(s.hbar > 0.0)) ld.fail(ScenarioErrorKind::kInvalidValue, "hbar", "hbar must be positive");
  const Tolerances& tol = s.tolerances;
  if (!(tol.hermiticity > 0.0) || !(tol.trace > 0.0) || !(tol.positivity > 0.0)) {
    ld.fail(ScenarioErrorKind::kInvalidValue, "tolerances", "tolerances must be positive");
  }
  const std::size_t dim = s.energies.size();
  if (dim == 0) {
    ld.fail(ScenarioErrorKind::kInvalidValue, "basis.energies", "at least one level required");
    return;
  }
  if (static_cast<std::size_t>(s.coupling.rows()) != dim) {
    ld.fail(ScenarioErrorKind::kInvalidValue, "coupling.matrix",
            "coupling dimension " + std::to_string(s.coupling.rows()) +
                " does not match the basis (" + std::to_string(dim) + ")");
  } else {
    check_hermitian(ld, s.coupling, "coupling.matrix", "coupling", tol.hermiticity);
  }
  if (!(s.g >= 0.0)) ld.fail(ScenarioErrorKind::kInvalidValue, "coupling.g", "g must be >= 0");
  if (s.t_bar.has_value() == s.eps_bar.has_value()) {
    ld.fail(s.t_bar ? ScenarioErrorKind::kInvalidValue : ScenarioErrorKind::kMissingField,
            "coarse_graining", "exactly one of t_bar / eps_bar must be given");
  } else if (!(s.t_bar.value_or(s.eps_bar.value_or(0.0)) > 0.0)) {
    ld.fail(ScenarioErrorKind::kInvalidValue, s.t_bar ? "coarse_graining.t_bar"
                                                      : "coarse_graining.eps_bar",
            "must be positive");
  }
  if (s.generators.empty()) {
    ld.fail(ScenarioErrorKind::kMissingField, "generators", "at least one generator required");
  }
  const auto has = [&s](GeneratorKind k) {
    return std::find(s.generators.begin(), s.generators.end(), k) != s.generators.end();
  };
  if (s.eta && !(*s.eta > 0.0)) {
    ld.fail(ScenarioErrorKind::kInvalidValue, "conventional.eta", "eta must be positive");
  }
  if (has(GeneratorKind::kConventionalKernel)) {
    if (!s.elapsed) {
      ld.fail(ScenarioErrorKind::kMissingField, "conventional.elapsed",
              "conventional_kernel needs an elapsed time");
    } else if (!(*s.elapsed > 0.0)) {
      ld.fail(ScenarioErrorKind::kInvalidValue, "conventional.elapsed", "must be positive");
    }
  }
  if (has(GeneratorKind::kProjected) && !s.projection) {
    ld.fail(ScenarioErrorKind::kMissingField, "projection",
            "the projected generator needs a projection");
  }
  check_state(ld, s.initial_state, dim, "initial_state", tol);

  if (s.projection) {
    const ProjectionConfig& p = *s.projection;
    try {
      if (p.kind == "block") {
        block_projection(p.blocks, dim);
      } else if (p.kind == "partial_trace") {
        if (p.system_dim * p.env_dim != dim) {
          ld.fail(ScenarioErrorKind::kInvalidValue, "projection",
                  "system_dim * env_dim must equal the basis dimension");
        } else {
          check_state(ld, p.omega, p.env_dim, "projection.omega", tol);
        }
      } else if (p.kind != "trivial") {
        ld.fail(ScenarioErrorKind::kInvalidValue, "projection.kind",
                "expected block, partial_trace or trivial");
      }
    } catch (const Error& e) {
      ld.fail(ScenarioErrorKind::kInvalidValue, "projection.blocks", e.what());
    }
  }

  try {
    s.propagation.validate();
  } catch (const Error& e) {
    ld.fail(ScenarioErrorKind::kInvalidValue, "propagation", e.what());
  }

  if (s.oracle) {
    const BipartiteFixture& o = *s.oracle;
    const std::size_t ns = o.system_energies.size();
    const std::size_t ne = o.environment_energies.size();
    if (ns == 0 || ne == 0) {
      ld.fail(ScenarioErrorKind::kInvalidValue, "oracle", "system and environment need levels");
    } else {
      if (ns * ne > kDefaultDimensionCap) {
        ld.fail(ScenarioErrorKind::kInvalidValue, "oracle", "product space exceeds the cap");
      }
      if (static_cast<std::size_t>(o.interaction.rows()) != ns * ne) {
        ld.fail(ScenarioErrorKind::kInvalidValue, "oracle.interaction",
                "interaction must act on the product space");
      } else {
        check_hermitian(ld, o.interaction, "oracle.interaction", "interaction", tol.hermiticity);
      }
      check_state(ld, o.omega0, ne, "oracle.omega0", tol);
      check_state(ld, o.rho0_system, ns, "oracle.rho0_system", tol);
    }
    if (!(o.tau_final > 0.0)) {
      ld.fail(ScenarioErrorKind::kInvalidValue, "oracle.tau_final", "must be positive");
    }
    if (o.snapshots == 0) {
      ld.fail(ScenarioErrorKind::kInvalidValue, "oracle.snapshots", "must be >= 1");
    }
  }
  if (s.scan) {
    if (!s.oracle) {
      ld.fail(ScenarioErrorKind::kMissingField, "oracle", "a scan needs a bipartite oracle");
    }
    try {
      ScalingSchedule(s.scan->t_ref, s.scan->xi, s.scan->g_values);
    } catch (const Error& e) {
      ld.fail(ScenarioErrorKind::kInvalidValue, "scan", e.what());
    }
  }
  for (double t : s.audit.t_bar_grid) {
    if (!(t > 0.0)) {
      ld.fail(ScenarioErrorKind::kInvalidValue, "audit.t_bar_grid", "entries must be positive");
    }
  }
  for (double e : s.audit.eps_bar_grid) {
    if (!(e > 0.0)) {
      ld.fail(ScenarioErrorKind::kInvalidValue, "audit.eps_bar_grid", "entries must be positive");
    }
  }
}

void emit_matrix(YAML::Emitter& out, const Matrix& m) {
  out << YAML::BeginSeq;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << YAML::Flow << YAML::BeginSeq;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << YAML::Flow << YAML::BeginSeq << m(i, j).real() << m(i, j).imag() << YAML::EndSeq;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndSeq;
}

void emit_numbers(YAML::Emitter& out, const std::vector<double>& v) {
  out << YAML::Flow << YAML::BeginSeq;
  for (double x : v) out << x;
  out << YAML::EndSeq;
}

}  // namespace

ScenarioError::ScenarioError(std::vector<ScenarioDiagnostic> diagnostics)
    : ValidationError(summarize(diagnostics)),
      diagnostics_(std::move(diagnostics)),
      kind_(ScenarioErrorKind::kInvalidValue) {
  for (const auto& d : diagnostics_) kind_ = std::max(kind_, d.kind);
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::kGfgr:
      return "gfgr";
    case GeneratorKind::kConventional:
      return "conventional";
    case GeneratorKind::kConventionalKernel:
      return "conventional_kernel";
    case GeneratorKind::kProjected:
      return "projected";
  }
  return "gfgr";
}

std::string to_string(Method method) {
  switch (method) {
    case Method::kAuto:
      return "auto";
    case Method::kExactExponential:
      return "exact-exponential";
    case Method::kRk4:
      return "rk4";
    case Method::kAdaptive:
      return "adaptive";
  }
  return "auto";
}

CoarseGrainingParams Scenario::coarse_graining() const {
  if (t_bar) return CoarseGrainingParams(*t_bar, hbar);
  if (eps_bar) return CoarseGrainingParams::from_eps_bar(*eps_bar, hbar);
  throw ParameterError("scenario has neither t_bar nor eps_bar");
}

double Scenario::conventional_width() const {
  return eta.value_or(coarse_graining().eps_bar());
}

bool operator==(const Scenario& a, const Scenario& b) {
  auto proj_eq = [](const std::optional<ProjectionConfig>& x,
                    const std::optional<ProjectionConfig>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->kind == y->kind && x->blocks == y->blocks && x->system_dim == y->system_dim &&
           x->env_dim == y->env_dim && matrices_equal(x->omega, y->omega);
  };
  auto oracle_eq = [](const std::optional<BipartiteFixture>& x,
                      const std::optional<BipartiteFixture>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->system_energies == y->system_energies &&
           x->environment_energies == y->environment_energies &&
           matrices_equal(x->interaction, y->interaction) && matrices_equal(x->omega0, y->omega0) &&
           matrices_equal(x->rho0_system, y->rho0_system) && x->hbar == y->hbar &&
           x->tau_final == y->tau_final && x->snapshots == y->snapshots;
  };
  auto scan_eq = [](const std::optional<ScanConfig>& x, const std::optional<ScanConfig>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->t_ref == y->t_ref && x->xi == y->xi && x->g_values == y->g_values;
  };
  auto ladder_eq = [](const std::optional<LadderScenario>& x,
                      const std::optional<LadderScenario>& y) {
    if (x.has_value() != y.has_value()) return false;
    if (!x) return true;
    return x->levels == y->levels && x->spacing == y->spacing && x->coupling == y->coupling &&
           x->hbar == y->hbar && x->probe == y->probe;
  };
  const PropagationSpec& p = a.propagation;
  const PropagationSpec& q = b.propagation;
  return a.name == b.name && a.seed == b.seed && a.hbar == b.hbar && a.energies == b.energies &&
         matrices_equal(a.coupling, b.coupling) && a.g == b.g && a.t_bar == b.t_bar &&
         a.eps_bar == b.eps_bar && a.generators == b.generators && a.eta == b.eta &&
         a.elapsed == b.elapsed && a.free_evolution == b.free_evolution &&
         matrices_equal(a.initial_state, b.initial_state) && proj_eq(a.projection, b.projection) &&
         p.t_final == q.t_final && p.dt == q.dt && p.method == q.method &&
         p.record_every == q.record_every && p.abs_tol == q.abs_tol && p.rel_tol == q.rel_tol &&
         oracle_eq(a.oracle, b.oracle) && scan_eq(a.scan, b.scan) &&
         a.audit.t_bar_grid == b.audit.t_bar_grid && ladder_eq(a.audit.ladder, b.audit.ladder) &&
         a.audit.eps_bar_grid == b.audit.eps_bar_grid && a.outputs.csv == b.outputs.csv &&
         a.outputs.ndjson == b.outputs.ndjson && a.outputs.rates == b.outputs.rates &&
         a.outputs.audits == b.outputs.audits &&
         a.tolerances.hermiticity == b.tolerances.hermiticity &&
         a.tolerances.trace == b.tolerances.trace &&
         a.tolerances.positivity == b.tolerances.positivity;
}

Scenario parse_scenario_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ScenarioError({{ScenarioErrorKind::kSyntax,
                          "line " + std::to_string(e.mark.line + 1) + ", column " +
                              std::to_string(e.mark.column + 1),
                          e.msg}});
  }
  if (!root.IsMap()) {
    throw ScenarioError({{ScenarioErrorKind::kSyntax, "<root>", "expected a key/value mapping"}});
  }

  Loader ld;
  Scenario s;
  ld.check_keys(root, "",
                {"name", "seed", "hbar", "basis", "coupling", "coarse_graining", "generators",
                 "conventional", "free_evolution", "initial_state", "projection", "propagation",
                 "oracle", "scan", "audit", "outputs", "tolerances"});

  if (auto n = ld.required(root, "", "name")) {
    if (auto v = ld.string(n, "name")) s.name = *v;
  }
  if (auto n = ld.required(root, "", "seed")) {
    if (auto v = ld.unsigned_integer(n, "seed")) s.seed = *v;
  }
  if (root["hbar"]) {
    if (auto v = ld.number(root["hbar"], "hbar")) s.hbar = *v;
  }

  if (auto basis = ld.required(root, "", "basis")) {
    ld.check_keys(basis, "basis", {"energies"});
    if (auto e = ld.required(basis, "basis", "energies")) s.energies = ld.numbers(e, "basis.energies");
  }

  if (auto coupling = ld.required(root, "", "coupling")) {
    ld.check_keys(coupling, "coupling", {"matrix", "g"});
    if (auto m = ld.required(coupling, "coupling", "matrix")) {
      if (auto mat = ld.matrix(m, "coupling.matrix")) s.coupling = *mat;
    }
    if (coupling["g"]) {
      if (auto v = ld.number(coupling["g"], "coupling.g")) s.g = *v;
    }
  }

  if (auto cg = ld.required(root, "", "coarse_graining")) {
    ld.check_keys(cg, "coarse_graining", {"t_bar", "eps_bar"});
    if (cg.IsMap() && cg["t_bar"]) s.t_bar = ld.number(cg["t_bar"], "coarse_graining.t_bar");
    if (cg.IsMap() && cg["eps_bar"]) {
      s.eps_bar = ld.number(cg["eps_bar"], "coarse_graining.eps_bar");
    }
  }

  if (auto gens = ld.required(root, "", "generators")) {
    if (!gens.IsSequence()) {
      ld.fail(ScenarioErrorKind::kInvalidValue, "generators", "expected a list of generator kinds");
    } else {
      for (std::size_t i = 0; i < gens.size(); ++i) {
        const std::string path = "generators[" + std::to_string(i) + "]";
        auto name = ld.string(gens[i], path);
        if (!name) continue;
        if (auto k = parse_generator_kind(*name)) {
          s.generators.push_back(*k);
        } else {
          ld.fail(ScenarioErrorKind::kInvalidValue, path,
                  "unknown generator '" + *name +
                      "' (gfgr, conventional, conventional_kernel, projected)");
        }
      }
    }
  }

  if (auto c = root["conventional"]) {
    ld.check_keys(c, "conventional", {"eta", "elapsed"});
    if (c["eta"]) s.eta = ld.number(c["eta"], "conventional.eta");
    if (c["elapsed"]) s.elapsed = ld.number(c["elapsed"], "conventional.elapsed");
  }
  if (root["free_evolution"]) {
    if (auto v = ld.boolean(root["free_evolution"], "free_evolution")) s.free_evolution = *v;
  }

  if (auto st = ld.required(root, "", "initial_state")) {
    if (auto m = ld.state(st, "initial_state")) s.initial_state = *m;
  }

  if (auto p = root["projection"]) {
    ld.check_keys(p, "projection", {"kind", "blocks", "system_dim", "env_dim", "omega"});
    ProjectionConfig cfg;
    if (auto k = ld.required(p, "projection", "kind")) {
      if (auto v = ld.string(k, "projection.kind")) cfg.kind = *v;
    }
    if (cfg.kind == "block") {
      if (auto b = ld.required(p, "projection", "blocks")) {
        if (!b.IsSequence()) {
          ld.fail(ScenarioErrorKind::kInvalidValue, "projection.blocks", "expected a list of lists");
        } else {
          for (std::size_t i = 0; i < b.size(); ++i) {
            std::vector<std::size_t> block;
            const auto labels = ld.numbers(b[i], "projection.blocks[" + std::to_string(i) + "]");
            for (double l : labels) {
              if (l < 0 || std::floor(l) != l) {
                ld.fail(ScenarioErrorKind::kInvalidValue, "projection.blocks",
                        "labels must be non-negative integers");
              } else {
                block.push_back(static_cast<std::size_t>(l));
              }
            }
            cfg.blocks.push_back(std::move(block));
          }
        }
      }
    } else if (cfg.kind == "partial_trace") {
      if (auto n = ld.required(p, "projection", "system_dim")) {
        if (auto v = ld.unsigned_integer(n, "projection.system_dim")) cfg.system_dim = *v;
      }
      if (auto n = ld.required(p, "projection", "env_dim")) {
        if (auto v = ld.unsigned_integer(n, "projection.env_dim")) cfg.env_dim = *v;
      }
      if (auto n = ld.required(p, "projection", "omega")) {
        if (auto m = ld.state(n, "projection.omega")) cfg.omega = *m;
      }
    }
    s.projection = std::move(cfg);
  }

  if (auto prop = ld.required(root, "", "propagation")) {
    ld.check_keys(prop, "propagation",
                  {"method", "t_final", "dt", "record_every", "abs_tol", "rel_tol"});
    s.propagation.method = Method::kExactExponential;
    if (auto n = ld.required(prop, "propagation", "t_final")) {
      if (auto v = ld.number(n, "propagation.t_final")) s.propagation.t_final = *v;
    }
    if (auto n = ld.required(prop, "propagation", "dt")) {
      if (auto v = ld.number(n, "propagation.dt")) s.propagation.dt = *v;
    }
    if (prop.IsMap() && prop["method"]) {
      if (auto v = ld.string(prop["method"], "propagation.method")) {
        if (auto m = parse_method(*v)) {
          s.propagation.method = *m;
        } else {
          ld.fail(ScenarioErrorKind::kInvalidValue, "propagation.method",
                  "expected exact-exponential, rk4, adaptive or auto");
        }
      }
    }
    if (prop.IsMap() && prop["record_every"]) {
      if (auto v = ld.unsigned_integer(prop["record_every"], "propagation.record_every")) {
        s.propagation.record_every = *v;
      }
    }
    if (prop.IsMap() && prop["abs_tol"]) {
      if (auto v = ld.number(prop["abs_tol"], "propagation.abs_tol")) s.propagation.abs_tol = *v;
    }
    if (prop.IsMap() && prop["rel_tol"]) {
      if (auto v = ld.number(prop["rel_tol"], "propagation.rel_tol")) s.propagation.rel_tol = *v;
    }
  }

  if (auto o = root["oracle"]) {
    ld.check_keys(o, "oracle",
                  {"system_energies", "environment_energies", "interaction", "omega0",
                   "rho0_system", "tau_final", "snapshots"});
    BipartiteFixture f;
    f.hbar = s.hbar;
    if (auto n = ld.required(o, "oracle", "system_energies")) {
      f.system_energies = ld.numbers(n, "oracle.system_energies");
    }
    if (auto n = ld.required(o, "oracle", "environment_energies")) {
      f.environment_energies = ld.numbers(n, "oracle.environment_energies");
    }
    if (auto n = ld.required(o, "oracle", "interaction")) {
      if (auto m = ld.matrix(n, "oracle.interaction")) f.interaction = *m;
    }
    if (auto n = ld.required(o, "oracle", "omega0")) {
      if (auto m = ld.state(n, "oracle.omega0")) f.omega0 = *m;
    }
    if (auto n = ld.required(o, "oracle", "rho0_system")) {
      if (auto m = ld.state(n, "oracle.rho0_system")) f.rho0_system = *m;
    }
    if (o["tau_final"]) {
      if (auto v = ld.number(o["tau_final"], "oracle.tau_final")) f.tau_final = *v;
    }
    if (o["snapshots"]) {
      if (auto v = ld.unsigned_integer(o["snapshots"], "oracle.snapshots")) f.snapshots = *v;
    }
    s.oracle = std::move(f);
  }

  if (auto sc = root["scan"]) {
    ld.check_keys(sc, "scan", {"t_ref", "xi", "g_values"});
    ScanConfig cfg;
    if (auto n = ld.required(sc, "scan", "t_ref")) {
      if (auto v = ld.number(n, "scan.t_ref")) cfg.t_ref = *v;
    }
    if (auto n = ld.required(sc, "scan", "xi")) {
      if (auto v = ld.number(n, "scan.xi")) cfg.xi = *v;
    }
    if (auto n = ld.required(sc, "scan", "g_values")) cfg.g_values = ld.numbers(n, "scan.g_values");
    s.scan = std::move(cfg);
  }

  if (auto a = root["audit"]) {
    ld.check_keys(a, "audit", {"t_bar_grid", "ladder", "eps_bar_grid"});
    if (a["t_bar_grid"]) s.audit.t_bar_grid = ld.numbers(a["t_bar_grid"], "audit.t_bar_grid");
    if (a["eps_bar_grid"]) {
      s.audit.eps_bar_grid = ld.numbers(a["eps_bar_grid"], "audit.eps_bar_grid");
    }
    if (auto l = a["ladder"]) {
      ld.check_keys(l, "audit.ladder", {"levels", "spacing", "coupling", "probe"});
      LadderScenario ladder;
      ladder.hbar = s.hbar;
      if (auto n = ld.required(l, "audit.ladder", "levels")) {
        if (auto v = ld.unsigned_integer(n, "audit.ladder.levels")) ladder.levels = *v;
      }
      if (auto n = ld.required(l, "audit.ladder", "spacing")) {
        if (auto v = ld.number(n, "audit.ladder.spacing")) ladder.spacing = *v;
      }
      if (auto n = ld.required(l, "audit.ladder", "coupling")) {
        if (auto v = ld.number(n, "audit.ladder.coupling")) ladder.coupling = *v;
      }
      if (l["probe"]) {
        if (auto v = ld.unsigned_integer(l["probe"], "audit.ladder.probe")) ladder.probe = *v;
      }
      s.audit.ladder = ladder;
    }
  }

  if (auto out = root["outputs"]) {
    ld.check_keys(out, "outputs", {"formats", "rates", "audits"});
    if (out["formats"]) {
      s.outputs.csv = false;
      s.outputs.ndjson = false;
      const YAML::Node f = out["formats"];
      if (!f.IsSequence()) {
        ld.fail(ScenarioErrorKind::kInvalidValue, "outputs.formats", "expected a list");
      } else {
        for (std::size_t i = 0; i < f.size(); ++i) {
          auto v = ld.string(f[i], "outputs.formats[" + std::to_string(i) + "]");
          if (v == "csv") {
            s.outputs.csv = true;
          } else if (v == "ndjson") {
            s.outputs.ndjson = true;
          } else if (v) {
            ld.fail(ScenarioErrorKind::kInvalidValue, "outputs.formats", "expected csv or ndjson");
          }
        }
      }
    }
    if (out["rates"]) {
      if (auto v = ld.boolean(out["rates"], "outputs.rates")) s.outputs.rates = *v;
    }
    if (out["audits"]) {
      if (auto v = ld.boolean(out["audits"], "outputs.audits")) s.outputs.audits = *v;
    }
  }

  if (auto t = root["tolerances"]) {
    ld.check_keys(t, "tolerances", {"hermiticity", "trace", "positivity"});
    if (t["hermiticity"]) {
      if (auto v = ld.number(t["hermiticity"], "tolerances.hermiticity")) {
        s.tolerances.hermiticity = *v;
      }
    }
    if (t["trace"]) {
      if (auto v = ld.number(t["trace"], "tolerances.trace")) s.tolerances.trace = *v;
    }
    if (t["positivity"]) {
      if (auto v = ld.number(t["positivity"], "tolerances.positivity")) {
        s.tolerances.positivity = *v;
      }
    }
  }

  if (!ld.diags.empty()) throw ScenarioError(std::move(ld.diags));
  collect_validation(ld, s);
  if (!ld.diags.empty()) throw ScenarioError(std::move(ld.diags));
  return s;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  return parse_scenario_text(io::read_file(path));
}

void validate_scenario(const Scenario& s) {
  Loader ld;
  collect_validation(ld, s);
  if (!ld.diags.empty()) throw ScenarioError(std::move(ld.diags));
}

std::string serialize_scenario(const Scenario& s) {
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << s.name;
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::Key << "hbar" << YAML::Value << s.hbar;
  out << YAML::Key << "basis" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "energies" << YAML::Value;
  emit_numbers(out, s.energies);
  out << YAML::EndMap;
  out << YAML::Key << "coupling" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "g" << YAML::Value << s.g;
  out << YAML::Key << "matrix" << YAML::Value;
  emit_matrix(out, s.coupling);
  out << YAML::EndMap;
  out << YAML::Key << "coarse_graining" << YAML::Value << YAML::BeginMap;
  if (s.t_bar) out << YAML::Key << "t_bar" << YAML::Value << *s.t_bar;
  if (s.eps_bar) out << YAML::Key << "eps_bar" << YAML::Value << *s.eps_bar;
  out << YAML::EndMap;
  out << YAML::Key << "generators" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (GeneratorKind k : s.generators) out << to_string(k);
  out << YAML::EndSeq;
  if (s.eta || s.elapsed) {
    out << YAML::Key << "conventional" << YAML::Value << YAML::BeginMap;
    if (s.eta) out << YAML::Key << "eta" << YAML::Value << *s.eta;
    if (s.elapsed) out << YAML::Key << "elapsed" << YAML::Value << *s.elapsed;
    out << YAML::EndMap;
  }
  out << YAML::Key << "free_evolution" << YAML::Value << s.free_evolution;
  out << YAML::Key << "initial_state" << YAML::Value << YAML::BeginMap << YAML::Key << "matrix"
      << YAML::Value;
  emit_matrix(out, s.initial_state);
  out << YAML::EndMap;
  if (s.projection) {
    const ProjectionConfig& p = *s.projection;
    out << YAML::Key << "projection" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << p.kind;
    if (p.kind == "block") {
      out << YAML::Key << "blocks" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (const auto& b : p.blocks) {
        out << YAML::Flow << YAML::BeginSeq;
        for (std::size_t l : b) out << l;
        out << YAML::EndSeq;
      }
      out << YAML::EndSeq;
    } else if (p.kind == "partial_trace") {
      out << YAML::Key << "system_dim" << YAML::Value << p.system_dim;
      out << YAML::Key << "env_dim" << YAML::Value << p.env_dim;
      out << YAML::Key << "omega" << YAML::Value << YAML::BeginMap << YAML::Key << "matrix"
          << YAML::Value;
      emit_matrix(out, p.omega);
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::Key << "propagation" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "method" << YAML::Value << to_string(s.propagation.method);
  out << YAML::Key << "t_final" << YAML::Value << s.propagation.t_final;
  out << YAML::Key << "dt" << YAML::Value << s.propagation.dt;
  out << YAML::Key << "record_every" << YAML::Value << s.propagation.record_every;
  out << YAML::Key << "abs_tol" << YAML::Value << s.propagation.abs_tol;
  out << YAML::Key << "rel_tol" << YAML::Value << s.propagation.rel_tol;
  out << YAML::EndMap;
  if (s.oracle) {
    const BipartiteFixture& o = *s.oracle;
    out << YAML::Key << "oracle" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "system_energies" << YAML::Value;
    emit_numbers(out, o.system_energies);
    out << YAML::Key << "environment_energies" << YAML::Value;
    emit_numbers(out, o.environment_energies);
    out << YAML::Key << "interaction" << YAML::Value;
    emit_matrix(out, o.interaction);
    out << YAML::Key << "omega0" << YAML::Value << YAML::BeginMap << YAML::Key << "matrix"
        << YAML::Value;
    emit_matrix(out, o.omega0);
    out << YAML::EndMap;
    out << YAML::Key << "rho0_system" << YAML::Value << YAML::BeginMap << YAML::Key << "matrix"
        << YAML::Value;
    emit_matrix(out, o.rho0_system);
    out << YAML::EndMap;
    out << YAML::Key << "tau_final" << YAML::Value << o.tau_final;
    out << YAML::Key << "snapshots" << YAML::Value << o.snapshots;
    out << YAML::EndMap;
  }
  if (s.scan) {
    out << YAML::Key << "scan" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "t_ref" << YAML::Value << s.scan->t_ref;
    out << YAML::Key << "xi" << YAML::Value << s.scan->xi;
    out << YAML::Key << "g_values" << YAML::Value;
    emit_numbers(out, s.scan->g_values);
    out << YAML::EndMap;
  }
  if (!s.audit.t_bar_grid.empty() || s.audit.ladder || !s.audit.eps_bar_grid.empty()) {
    out << YAML::Key << "audit" << YAML::Value << YAML::BeginMap;
    if (!s.audit.t_bar_grid.empty()) {
      out << YAML::Key << "t_bar_grid" << YAML::Value;
      emit_numbers(out, s.audit.t_bar_grid);
    }
    if (!s.audit.eps_bar_grid.empty()) {
      out << YAML::Key << "eps_bar_grid" << YAML::Value;
      emit_numbers(out, s.audit.eps_bar_grid);
    }
    if (s.audit.ladder) {
      const LadderScenario& l = *s.audit.ladder;
      out << YAML::Key << "ladder" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "levels" << YAML::Value << l.levels;
      out << YAML::Key << "spacing" << YAML::Value << l.spacing;
      out << YAML::Key << "coupling" << YAML::Value << l.coupling;
      if (l.probe) out << YAML::Key << "probe" << YAML::Value << *l.probe;
      out << YAML::EndMap;
    }
    out << YAML::EndMap;
  }
  out << YAML::Key << "outputs" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "formats" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  if (s.outputs.csv) out << "csv";
  if (s.outputs.ndjson) out << "ndjson";
  out << YAML::EndSeq;
  out << YAML::Key << "rates" << YAML::Value << s.outputs.rates;
  out << YAML::Key << "audits" << YAML::Value << s.outputs.audits;
  out << YAML::EndMap;
  out << YAML::Key << "tolerances" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "hermiticity" << YAML::Value << s.tolerances.hermiticity;
  out << YAML::Key << "trace" << YAML::Value << s.tolerances.trace;
  out << YAML::Key << "positivity" << YAML::Value << s.tolerances.positivity;
  out << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace gfgr
