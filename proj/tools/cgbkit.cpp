#include <CLI11.hpp>

#include <algorithm>
#include <iostream>
#include <string>
#include <vector>

#include "cgbkit/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSuiteFailure = 1;
constexpr int kExitUsage = 2;

int run_command(const std::string& config_path, const std::vector<std::string>& suites, const std::string& out_dir,
                const std::optional<std::uint64_t>& seed) {
  using namespace cgbkit::report;
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.diagnostic(config_path) << '\n';
    return kExitUsage;
  }
  for (const auto& s : suites) {
    const auto& names = suite_names();
    if (std::find(names.begin(), names.end(), s) == names.end()) {
      std::cerr << "unknown suite '" << s << "'; see `cgbkit list-models`\n";
      return kExitUsage;
    }
  }
  if (!suites.empty()) cfg.suites = suites;
  if (seed) cfg.seed = *seed;
  const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;

  std::vector<VerdictRecord> records;
  try {
    records = run(cfg);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << config_path << ": " << e.what() << '\n';
    return kExitUsage;
  }
  write_reports(cfg, records, dir);
  print_table(std::cout, records);

  const auto count = [&](cgbkit::VerdictStatus s) {
    return std::count_if(records.begin(), records.end(), [&](const VerdictRecord& r) { return r.verdict() == s; });
  };
  std::cout << "\n" << count(cgbkit::VerdictStatus::pass) << " passed, " << count(cgbkit::VerdictStatus::fail)
            << " failed, " << count(cgbkit::VerdictStatus::inconclusive) << " inconclusive; reports in " << dir << '\n';
  return any_failed(records) ? kExitSuiteFailure : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks of Chern-Gauss-Bonnet integrands and total-curvature bounds", "cgbkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> suites;
  std::string out_dir;
  std::uint64_t seed = 0;
  auto* run = app.add_subcommand("run", "Run the suites selected by a YAML config");
  run->add_option("config", config_path, "Path to the run config")->required();
  run->add_option("--suite", suites, "Run only this suite (repeatable)");
  run->add_option("--out", out_dir, "Output directory for report.jsonl and summary.csv");
  auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");

  auto* list = app.add_subcommand("list-models", "Print built-in charts, surfaces, suites and defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  if (list->parsed()) {
    std::cout << cgbkit::report::list_models();
    return kExitOk;
  }
  std::optional<std::uint64_t> seed_override;
  if (seed_opt->count() > 0) seed_override = seed;
  return run_command(config_path, suites, out_dir, seed_override);
}
