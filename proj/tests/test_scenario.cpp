#include <catch_amalgamated.hpp>

#include <openssl/evp.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gfgr/io.hpp"
#include "gfgr/runner.hpp"
#include "gfgr/scenario.hpp"

namespace fs = std::filesystem;
using namespace gfgr;

namespace {

const fs::path kScenarios = GFGR_SCENARIO_DIR;

const char* kMinimal = R"(name: minimal
seed: 7
basis:
  energies: [0, 1]
coupling:
  matrix:
    - [[0, 0], [0.5, 0]]
    - [[0.5, 0], [0, 0]]
coarse_graining:
  t_bar: 2
generators: [gfgr]
initial_state:
  diagonal: [1, 0]
propagation:
  t_final: 1
  dt: 0.1
)";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

ScenarioError expect_rejection(const std::string& text) {
  try {
    parse_scenario_text(text);
  } catch (const ScenarioError& e) {
    return e;
  }
  FAIL("scenario was accepted");
  throw std::logic_error("unreachable");
}

bool has_path(const ScenarioError& e, const std::string& path) {
  for (const auto& d : e.diagnostics())
    if (d.path == path) return true;
  return false;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("gfgr-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  FAIL("missing column " << name);
  return 0;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  REQUIRE(EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) == 1);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

RunResult run_file(const fs::path& file, const fs::path& out) {
  RunOptions options;
  options.out_dir = out;
  options.source_text = io::read_file(file);
  return run_scenario(parse_scenario_text(*options.source_text), options);
}

}  // namespace

TEST_CASE("minimal scenario gets defaults", "[scenario][parse]") {
  const Scenario s = parse_scenario_text(kMinimal);
  CHECK(s.name == "minimal");
  CHECK(s.seed == 7);
  CHECK(s.hbar == 1.0);
  CHECK(s.g == 1.0);
  CHECK(s.propagation.method == Method::kExactExponential);
  CHECK(s.propagation.record_every == 1);
  CHECK(s.free_evolution);
  CHECK(s.t_bar == 2.0);
  CHECK_FALSE(s.eps_bar.has_value());
  CHECK(s.coarse_graining().eps_bar() == 0.5);
  CHECK(s.conventional_width() == 0.5);
  CHECK(s.outputs.csv);
  CHECK(s.outputs.ndjson);
  CHECK_FALSE(s.projection.has_value());
  CHECK_FALSE(s.oracle.has_value());
  CHECK(s.generators == std::vector<GeneratorKind>{GeneratorKind::kGfgr});

  const Scenario e = parse_scenario_text(
      replace(replace(kMinimal, "t_bar: 2", "eps_bar: 0.25"), "seed: 7", "seed: 7\nhbar: 0.5"));
  CHECK(e.coarse_graining().t_bar() == 2.0);
  CHECK(e.coarse_graining().hbar() == 0.5);
}

TEST_CASE("initial state forms", "[scenario][parse]") {
  const Scenario pure = parse_scenario_text(
      replace(kMinimal, "diagonal: [1, 0]", "pure: [[3, 0], [0, 4]]"));
  CHECK(std::abs(pure.initial_state(0, 0).real() - 0.36) <= 1e-15);
  CHECK(std::abs(pure.initial_state(0, 1) - Complex(0.0, -0.48)) <= 1e-15);
  const Scenario spectral = parse_scenario_text(replace(
      kMinimal, "diagonal: [1, 0]", "spectrum: [0.25, 0.75]"));
  CHECK(std::abs(spectral.initial_state(1, 1).real() - 0.75) <= 1e-15);
  const ScenarioError bad = expect_rejection(replace(kMinimal, "diagonal: [1, 0]", "diagonal: [1.2, -0.2]"));
  CHECK(bad.kind() == ScenarioErrorKind::kInvalidValue);
  CHECK(has_path(bad, "initial_state"));
}

TEST_CASE("non-Hermitian coupling is rejected naming the entry", "[scenario][errors]") {
  const ScenarioError e = expect_rejection(replace(kMinimal, "- [[0.5, 0], [0, 0]]", "- [[0.4, 0], [0, 0]]"));
  CHECK(e.kind() == ScenarioErrorKind::kNotHermitian);
  CHECK(exit_code_for(e.kind()) == kExitValidation);
  CHECK(has_path(e, "coupling.matrix[0][1]"));
  const std::string what = e.what();
  CHECK(what.find("coupling not Hermitian") != std::string::npos);
  CHECK(what.find("(0,1)") != std::string::npos);
}

TEST_CASE("scenario error kinds and exit codes", "[scenario][errors]") {
  SECTION("syntax") {
    const ScenarioError e = expect_rejection("name: [minimal\nseed: 1\n");
    CHECK(e.kind() == ScenarioErrorKind::kSyntax);
    CHECK(exit_code_for(e.kind()) == kExitSyntax);
    CHECK(std::string(e.what()).find("line") != std::string::npos);
    CHECK(expect_rejection("- just\n- a list\n").kind() == ScenarioErrorKind::kSyntax);
  }
  SECTION("missing field") {
    const ScenarioError e = expect_rejection(replace(kMinimal, "seed: 7\n", ""));
    CHECK(e.kind() == ScenarioErrorKind::kMissingField);
    CHECK(exit_code_for(e.kind()) == kExitMissingField);
    CHECK(has_path(e, "seed"));
    CHECK(e.diagnostics().size() == 1);
    CHECK(has_path(expect_rejection(replace(kMinimal, "  t_bar: 2\n", "  {}\n")), "coarse_graining"));
  }
  SECTION("invalid values") {
    const auto invalid = [](const std::string& text, const std::string& path) {
      const ScenarioError e = expect_rejection(text);
      CHECK(e.kind() == ScenarioErrorKind::kInvalidValue);
      CHECK(exit_code_for(e.kind()) == kExitValidation);
      CHECK(has_path(e, path));
    };
    invalid(replace(kMinimal, "seed: 7", "seed: 7\nbogus: 1"), "bogus");
    invalid(replace(kMinimal, "t_bar: 2", "t_bar: 2\n  eps_bar: 0.5"), "coarse_graining");
    invalid(replace(kMinimal, "name: minimal", "name: a/b"), "name");
    invalid(replace(kMinimal, "dt: 0.1", "dt: -0.1"), "propagation");
    invalid(replace(kMinimal, "t_bar: 2", "t_bar: 0"), "coarse_graining.t_bar");
    invalid(replace(kMinimal, "energies: [0, 1]", "energies: [0, 1, 2]"), "coupling.matrix");
    invalid(replace(kMinimal, "[gfgr]", "[gfgr, magic]"), "generators[1]");
    invalid(replace(kMinimal, "seed: 7", "seed: 7\nprojection:\n  kind: block\n  blocks: [[0], [0, 1]]"),
            "projection.blocks");
  }
  SECTION("projected generator without a projection") {
    const ScenarioError e = expect_rejection(replace(kMinimal, "[gfgr]", "[projected]"));
    CHECK(e.kind() == ScenarioErrorKind::kMissingField);
    CHECK(has_path(e, "projection"));
  }
  SECTION("unknown propagation method") {
    const ScenarioError e = expect_rejection(replace(kMinimal, "dt: 0.1", "dt: 0.1\n  method: euler"));
    CHECK(has_path(e, "propagation.method"));
  }
}

TEST_CASE("shipped scenarios round-trip", "[scenario][roundtrip]") {
  std::size_t count = 0;
  for (const auto& entry : fs::directory_iterator(kScenarios)) {
    if (entry.path().extension() != ".yaml") continue;
    ++count;
    INFO(entry.path());
    const Scenario a = parse_scenario(entry.path());
    const std::string text = serialize_scenario(a);
    const Scenario b = parse_scenario_text(text);
    CHECK(a == b);
    CHECK(serialize_scenario(b) == text);
    CHECK(a.name == entry.path().stem().string());
  }
  CHECK(count >= 5);
  Scenario changed = parse_scenario_text(kMinimal);
  const Scenario original = changed;
  changed.coupling(0, 1) = Complex(0.5, 1e-16);
  changed.coupling(1, 0) = Complex(0.5, -1e-16);
  CHECK_FALSE(changed == original);
}

TEST_CASE("option overrides", "[scenario][options]") {
  const Tolerances t = parse_tolerance_overrides("hermiticity=1e-9,positivity=1e-6");
  CHECK(t.hermiticity == 1e-9);
  CHECK(t.positivity == 1e-6);
  CHECK(t.trace == Tolerances{}.trace);
  CHECK_THROWS_AS(parse_tolerance_overrides("speed=1"), ParameterError);
  CHECK_THROWS_AS(parse_tolerance_overrides("trace=-1"), ParameterError);
  RunOptions o;
  o.seed = 99;
  o.tolerances = t;
  const Scenario s = apply_options(parse_scenario_text(kMinimal), o);
  CHECK(s.seed == 99);
  CHECK(s.tolerances.hermiticity == 1e-9);
}

TEST_CASE("two-level-t1t2 run", "[scenario][run]") {
  TempDir tmp;
  const RunResult r = run_file(kScenarios / "two-level-t1t2.yaml", tmp.path());
  CHECK(r.exit_code == kExitOk);
  REQUIRE(r.generators.size() == 2);
  for (const GeneratorRun& g : r.generators) CHECK(g.ok);

  const auto t3 = read_csv(r.directory / "t3.csv");
  const std::size_t gen = column(t3[0], "generator");
  const std::size_t norm = column(t3[0], "t3_norm");
  std::size_t gfgr_rows = 0;
  for (std::size_t i = 1; i < t3.size(); ++i) {
    if (t3[i][gen] != "gfgr") continue;
    ++gfgr_rows;
    CHECK(std::stod(t3[i][norm]) <= 1e-13);
  }
  CHECK(gfgr_rows == 5);

  const auto traj = read_csv(r.directory / "gfgr_trajectory.csv");
  const std::size_t re = column(traj[0], "rho_0_1_re");
  const std::size_t im = column(traj[0], "rho_0_1_im");
  const std::size_t mineig = column(traj[0], "min_eigenvalue");
  REQUIRE(traj.size() == 202);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double c = std::hypot(std::stod(traj[i][re]), std::stod(traj[i][im]));
    CHECK(c <= previous + 1e-15);
    previous = c;
    CHECK(std::stod(traj[i][mineig]) >= -1e-10);
  }
  CHECK(previous < 0.5 * 0.48);
}

TEST_CASE("positivity-witness run", "[scenario][run]") {
  TempDir tmp;
  const RunResult r = run_file(kScenarios / "positivity-witness.yaml", tmp.path());
  CHECK(r.exit_code == kExitOk);
  REQUIRE(r.generators.size() == 2);
  const GeneratorRun& conv = r.generators[0];
  const GeneratorRun& gf = r.generators[1];
  CHECK(conv.name == "conventional");
  REQUIRE(conv.positivity.has_value());
  CHECK(conv.positivity->violated());
  CHECK(conv.positivity->global_min < -1e-3);
  CHECK(gf.name == "gfgr");
  REQUIRE(gf.positivity.has_value());
  CHECK_FALSE(gf.positivity->violated());

  const nlohmann::json m = nlohmann::json::parse(io::read_file(r.directory / "manifest.json"));
  CHECK(m["generators"][0]["positivity_violated"] == true);
  CHECK(m["generators"][1]["positivity_violated"] == false);
}

TEST_CASE("unwritable output directory fails before computing", "[scenario][run][io]") {
  TempDir tmp;
  const fs::path blocker = tmp.path() / "file";
  std::ofstream(blocker) << "x";
  CHECK_THROWS_AS(prepare_output_dir(blocker / "sub", "minimal"), IoError);
  RunOptions o;
  o.out_dir = blocker / "sub";
  CHECK_THROWS_AS(run_scenario(parse_scenario_text(kMinimal), o), IoError);
  CHECK_THROWS_AS(run_scan(parse_scenario(kScenarios / "weak-coupling.yaml"), o), IoError);
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(tmp.path())) ++entries;
  CHECK(entries == 1);
}

TEST_CASE("runs are deterministic", "[scenario][run][property]") {
  TempDir a;
  TempDir b;
  for (const char* name : {"two-level-t1t2.yaml", "device-contacts.yaml", "positivity-witness.yaml"}) {
    const RunResult ra = run_file(kScenarios / name, a.path());
    const RunResult rb = run_file(kScenarios / name, b.path());
    REQUIRE(ra.files == rb.files);
    for (const std::string& f : ra.files) {
      if (fs::path(f).extension() != ".csv" && fs::path(f).extension() != ".ndjson") continue;
      INFO(name << " " << f);
      CHECK(io::read_file(ra.directory / f) == io::read_file(rb.directory / f));
    }
  }
}

TEST_CASE("manifest lists every output with its hash", "[scenario][run][manifest]") {
  TempDir tmp;
  for (const char* name : {"two-level-t1t2.yaml", "device-contacts.yaml", "two-level-t3.yaml"}) {
    const RunResult r = run_file(kScenarios / name, tmp.path());
    const nlohmann::json m = nlohmann::json::parse(io::read_file(r.directory / "manifest.json"));
    std::set<std::string> listed;
    for (const auto& f : m["files"]) {
      const std::string path = f["path"];
      const std::string bytes = io::read_file(r.directory / path);
      CHECK(f["sha256"] == sha256_hex(bytes));
      CHECK(f["bytes"] == bytes.size());
      listed.insert(path);
    }
    std::set<std::string> on_disk;
    for (const auto& e : fs::directory_iterator(r.directory))
      if (e.path().filename() != "manifest.json") on_disk.insert(e.path().filename().string());
    CHECK(listed == on_disk);
    CHECK(m["inputs_sha256"] == sha256_hex(io::read_file(kScenarios / name)));
    CHECK(m["scenario"] == fs::path(name).stem().string());
    CHECK(m["exit_code"] == 0);
    CHECK(m.contains("wall_time_seconds"));
    CHECK(m["versions"].contains("gfgr"));
    CHECK(m["versions"].contains("eigen"));
  }
}

TEST_CASE("numerical failure aborts one generator and continues", "[scenario][run][errors]") {
  // a vanishing conventional width puts 1/eta on the diagonal kernel, which
  // acts on coherences; rk4 at this step size overflows while GFGR stays finite
  const std::string text = replace(
      replace(replace(replace(kMinimal, "[gfgr]", "[conventional, gfgr]\nconventional:\n  eta: 1e-9"),
                      "t_final: 1\n  dt: 0.1", "t_final: 3\n  dt: 0.1\n  method: rk4"),
              "diagonal: [1, 0]", "pure: [[1, 0], [1, 0]]"),
      "- [[0, 0], [0.5, 0]]\n    - [[0.5, 0], [0, 0]]", "- [[0.5, 0], [0.5, 0]]\n    - [[0.5, 0], [0, 0]]");
  TempDir tmp;
  RunOptions o;
  o.out_dir = tmp.path();
  const RunResult r = run_scenario(parse_scenario_text(text), o);
  CHECK(r.exit_code == kExitNumerical);
  REQUIRE(r.generators.size() == 2);
  CHECK_FALSE(r.generators[0].ok);
  CHECK(r.generators[0].error.find("non-finite") != std::string::npos);
  CHECK(r.generators[1].ok);
  CHECK(fs::exists(r.directory / "gfgr_trajectory.csv"));
  const nlohmann::json m = nlohmann::json::parse(io::read_file(r.directory / "manifest.json"));
  CHECK(m["generators"][0]["status"] == "failed");
  CHECK(m["generators"][1]["status"] == "ok");
  CHECK(m["exit_code"] == kExitNumerical);
}

TEST_CASE("rate tables are limited to small dimensions", "[scenario][rates]") {
  Scenario s = parse_scenario_text(kMinimal);
  const Eigen::Index n = 17;
  s.energies.resize(std::size_t(n));
  for (Eigen::Index i = 0; i < n; ++i) s.energies[std::size_t(i)] = 0.1 * double(i);
  s.coupling = Matrix::Zero(n, n);
  s.coupling(0, 1) = s.coupling(1, 0) = 0.2;
  s.initial_state = Matrix::Zero(n, n);
  s.initial_state(0, 0) = 1.0;
  validate_scenario(s);
  TempDir tmp;
  RunOptions o;
  o.out_dir = tmp.path();
  CHECK_THROWS_AS(run_rates(s, o), ScenarioError);
  const RunResult r = run_scenario(s, o);
  for (const std::string& f : r.files) CHECK(f.find("rate") == std::string::npos);
}

TEST_CASE("scan writes a non-increasing weak-coupling table", "[scenario][scan]") {
  TempDir tmp;
  RunOptions o;
  o.out_dir = tmp.path();
  const RunResult r = run_scan(parse_scenario(kScenarios / "weak-coupling.yaml"), o);
  CHECK(r.exit_code == kExitOk);
  const auto rows = read_csv(r.directory / "weak_coupling_scan.csv");
  REQUIRE(rows.size() == 4);
  const std::size_t d = column(rows[0], "distance_rescaled");
  const std::size_t tb = column(rows[0], "t_bar");
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(std::stod(rows[i][d]) <= std::stod(rows[i - 1][d]));
  CHECK(std::stod(rows[1][tb]) == 5.0);
  CHECK(std::stod(rows[3][tb]) == 20.0);
  const nlohmann::json m = nlohmann::json::parse(io::read_file(r.directory / "manifest.json"));
  CHECK(m["scan_non_increasing"] == true);
  CHECK_THROWS_AS(run_scan(parse_scenario_text(kMinimal), o), ScenarioError);
}
