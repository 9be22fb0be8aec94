// gfgr: batch runner for scenario files.
//
//   gfgr [--out-dir DIR] [--seed N] [--tol-overrides k=v,...] [--workers N]
//        (run | validate | scan | audit [--search-witness N] | rates) SCENARIO...
#include <atomic>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "gfgr/io.hpp"
#include "gfgr/runner.hpp"
#include "gfgr/scenario.hpp"

namespace {

enum class Command { kRun, kValidate, kScan, kAudit, kRates };

std::mutex g_log_mutex;

void log_line(std::ostream& os, const std::string& line) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  os << line << '\n';
}

int handle(Command cmd, const std::string& path, gfgr::RunOptions options) {
  try {
    const std::string text = gfgr::io::read_file(path);
    const gfgr::Scenario s = gfgr::parse_scenario_text(text);
    options.source_text = text;
    gfgr::RunResult result;
    switch (cmd) {
      case Command::kValidate:
        gfgr::apply_options(s, options);
        log_line(std::cout, path + ": ok (" + s.name + ", dim " +
                                std::to_string(s.energies.size()) + ")");
        return gfgr::kExitOk;
      case Command::kRun:
        result = gfgr::run_scenario(s, options);
        break;
      case Command::kScan:
        result = gfgr::run_scan(s, options);
        break;
      case Command::kAudit:
        result = gfgr::run_audit(s, options);
        break;
      case Command::kRates:
        result = gfgr::run_rates(s, options);
        break;
    }
    for (const auto& g : result.generators) {
      std::string line = path + ": " + g.name + " " + (g.ok ? "ok" : "FAILED: " + g.error);
      if (g.positivity && g.positivity->violated()) {
        line += " (positivity violated, min eigenvalue " +
                gfgr::io::format_number(g.positivity->global_min) + ")";
      }
      log_line(std::cout, line);
    }
    log_line(std::cout, path + ": wrote " + std::to_string(result.files.size() + 1) +
                            " files to " + result.directory.string());
    return result.exit_code;
  } catch (const gfgr::ScenarioError& e) {
    log_line(std::cerr, path + ": " + e.what());
    return gfgr::exit_code_for(e.kind());
  } catch (const gfgr::IoError& e) {
    log_line(std::cerr, path + ": I/O error: " + e.what());
    return gfgr::kExitIo;
  } catch (const gfgr::NumericalError& e) {
    log_line(std::cerr, path + ": numerical failure: " + e.what());
    return gfgr::kExitNumerical;
  } catch (const gfgr::Error& e) {
    log_line(std::cerr, path + ": " + e.what());
    return gfgr::kExitValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse-grained open-system dynamics: scenario batch runner"};
  app.require_subcommand(1);

  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::string tol_overrides;
  unsigned workers = 1;
  app.add_option("--out-dir", out_dir, "Directory receiving one folder per scenario");
  app.add_option("--seed", seed, "Override the scenario seed");
  app.add_option("--tol-overrides", tol_overrides,
                 "Comma-separated hermiticity=, trace=, positivity= overrides");
  app.add_option("--workers", workers, "Scenarios processed concurrently")
      ->check(CLI::PositiveNumber);

  std::vector<std::string> files;
  std::size_t witness_trials = 0;
  Command cmd = Command::kRun;
  auto add = [&](const char* name, const char* help, Command c) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("scenarios", files, "Scenario files")->required()->check(CLI::ExistingFile);
    sub->callback([&cmd, c] { cmd = c; });
    return sub;
  };
  add("run", "Propagate every generator and write trajectories, rates and audits", Command::kRun);
  add("validate", "Parse and validate scenario files only", Command::kValidate);
  add("scan", "Weak-coupling scan against the exact reduced reference", Command::kScan);
  CLI::App* audit = add("audit", "T3, generator-distance, projection and convergence audits",
                        Command::kAudit);
  audit->add_option("--search-witness", witness_trials,
                    "Run a seeded positivity-witness search with this many trials");
  add("rates", "Write rate tensors and semiclassical rate tables", Command::kRates);

  CLI11_PARSE(app, argc, argv);

  gfgr::RunOptions options;
  options.out_dir = out_dir;
  options.seed = seed;
  options.witness_trials = witness_trials;
  if (!tol_overrides.empty()) {
    try {
      options.tolerances = gfgr::parse_tolerance_overrides(tol_overrides);
    } catch (const gfgr::Error& e) {
      std::cerr << "--tol-overrides: " << e.what() << '\n';
      return gfgr::kExitValidation;
    }
  }

  std::vector<int> codes(files.size(), gfgr::kExitOk);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      codes[i] = handle(cmd, files[i], options);
    }
  };
  std::vector<std::thread> pool;
  const std::size_t n = std::min<std::size_t>(workers, files.size());
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  // first nonzero code across scenarios
  int exit_code = gfgr::kExitOk;
  for (int c : codes) {
    if (c != gfgr::kExitOk && exit_code == gfgr::kExitOk) exit_code = c;
  }
  return exit_code;
}
