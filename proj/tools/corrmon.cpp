// corrmon: run, sweep, bound and verify correlated-source monitoring experiments.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "corrmon/config.hpp"
#include "corrmon/errors.hpp"
#include "corrmon/harness.hpp"
#include "corrmon/oracle.hpp"

namespace fs = std::filesystem;
using namespace corrmon;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerifyFailed = 2;

ExperimentConfig load(const std::string& path, const std::optional<std::uint64_t>& seed) {
  ExperimentConfig c = load_config(path);
  if (seed) c.seed = *seed;
  return c;
}

std::string cell_file(Index m, double rho, PolicyKind kind) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "traj_m%lld_rho%g_%s.csv", static_cast<long long>(m), rho,
                std::string(policy_name(kind)).c_str());
  return buf;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed) {
  const ExperimentConfig c = load(config_path, seed);
  fs::create_directories(out_dir);
  std::vector<TrajectorySummary> summaries;
  for (Index m : c.m) {
    for (double rho : c.rho) {
      for (const PolicySpec& p : c.policies) {
        const TrajectoryResult r = run_trajectory(c, p, m, rho);
        write_csv(r.records, fs::path(out_dir) / cell_file(r.summary.m, rho, p.kind));
        summaries.push_back(r.summary);
        std::printf("m=%lld rho=%g %-11s normalized error %.6g (lb %.6g, ub %.6g)\n",
                    static_cast<long long>(r.summary.m), rho,
                    std::string(policy_name(p.kind)).c_str(), r.summary.normalized_error,
                    r.summary.avg_lb / static_cast<double>(r.summary.m),
                    r.summary.avg_ub / static_cast<double>(r.summary.m));
      }
    }
  }
  write_summary_csv(summaries, fs::path(out_dir) / "summary.csv");
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              const std::optional<std::uint64_t>& seed) {
  const ExperimentConfig c = load(config_path, seed);
  fs::create_directories(out_dir);
  const std::vector<SweepRow> rows = run_sweep(c);
  write_sweep_csv(rows, fs::path(out_dir) / "sweep.csv");
  std::size_t failed = 0;
  for (const SweepRow& r : rows) {
    if (r.status != "ok") {
      ++failed;
      std::cerr << "cell m=" << r.m << " rho=" << r.rho << " " << policy_name(r.policy)
                << " failed: " << r.status << "\n";
    }
  }
  std::printf("%zu cells, %zu failed\n", rows.size(), failed);
  return kExitOk;
}

int cmd_bounds(const std::string& config_path) {
  const ExperimentConfig c = load(config_path, std::nullopt);
  std::cout << "m,rho,kind,lb,ub,lb_norm,ub_norm,guarantee_ratio\n";
  for (Index m : c.m) {
    for (double rho : c.rho) {
      const SystemModel model = build_model(c, m, rho);
      const ScenarioBounds b = scenario_bounds(model);
      const double md = static_cast<double>(model.dim());
      std::cout << model.dim() << ',' << format_real(rho) << ',' << b.kind << ','
                << format_real(b.lower) << ',' << format_real(b.upper) << ','
                << format_real(b.lower / md) << ',' << format_real(b.upper / md) << ','
                << format_real(b.guarantee) << '\n';
    }
  }
  return kExitOk;
}

int cmd_verify(const std::string& suite, const std::optional<std::uint64_t>& seed) {
  const std::uint64_t s = seed.value_or(20240101);
  std::vector<SuiteResult> results;
  if (suite == "lemmas" || suite == "all") {
    auto r = run_lemma_suite(s);
    results.insert(results.end(), r.begin(), r.end());
  }
  if (suite == "oracle" || suite == "all") {
    auto r = run_oracle_suite(s);
    results.insert(results.end(), r.begin(), r.end());
  }
  bool ok = true;
  for (const SuiteResult& r : results) {
    std::printf("%s %-26s %5zu cases  %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.cases,
                r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scheduling and error bounds for monitoring correlated sources"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string suite = "all";
  std::optional<std::uint64_t> seed;

  auto add_seed = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Override the configured seed");
  };

  CLI::App* run = app.add_subcommand("run", "Simulate every policy and write per-slot CSVs");
  run->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  add_seed(run);

  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter sweep and write sweep.csv");
  sweep->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out_dir, "Output directory")->required();
  add_seed(sweep);

  CLI::App* bounds = app.add_subcommand("bounds", "Print the scenario bounds as CSV");
  bounds->add_option("--config", config_path, "Experiment config")->required()->check(CLI::ExistingFile);

  CLI::App* verify = app.add_subcommand("verify", "Run the randomized lemma and oracle checks");
  verify->add_option("--suite", suite, "lemmas, oracle or all")
      ->check(CLI::IsMember({"lemmas", "oracle", "all"}));
  add_seed(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir, seed);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir, seed);
    if (bounds->parsed()) return cmd_bounds(config_path);
    if (verify->parsed()) return cmd_verify(suite, seed);
  } catch (const std::exception& e) {
    std::cerr << "corrmon: " << e.what() << "\n";
    try {
      std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
      std::cerr << "  caused by: " << inner.what() << "\n";
    }
    return kExitError;
  }
  return kExitError;
}
