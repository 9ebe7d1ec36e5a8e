// pfld command-line runner.
#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "pfld/harness/config.hpp"
#include "pfld/harness/experiment.hpp"
#include "pfld/harness/report_io.hpp"
#include "pfld/harness/verify.hpp"

namespace fs = std::filesystem;
using namespace pfld;
using namespace pfld::harness;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

struct CommonArgs {
  std::string config;
  std::string seed;
  std::string seeds;
  std::string out;
  std::vector<std::string> formats;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  auto* s1 = cmd->add_option("--seed", a.seed, "Single seed");
  auto* s2 = cmd->add_option("--seeds", a.seeds, "Seed list: 1,2,3 or base:count");
  s1->excludes(s2);
  cmd->add_option("--out", a.out, "Output directory (overrides output.dir)");
  cmd->add_option("--format", a.formats, "Output formats to write")
      ->check(CLI::IsMember({"json", "csv"}))
      ->delimiter(',');
  cmd->add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const CommonArgs& a) {
  ExperimentConfig cfg = load_config(a.config);
  if (!a.seed.empty()) cfg.seeds = parse_seed_list(a.seed);
  if (!a.seeds.empty()) cfg.seeds = parse_seed_list(a.seeds);
  if (!a.out.empty()) cfg.output.dir = a.out;
  if (!a.formats.empty()) {
    cfg.output.json = false;
    cfg.output.csv = false;
    for (const auto& f : a.formats) (f == "json" ? cfg.output.json : cfg.output.csv) = true;
  }
  return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.output.dir) / name).string();
}

void write_run_reports(const ExperimentConfig& cfg, const BuiltProblem& built, const std::vector<RunRecord>& recs,
                       const std::string& prefix) {
  if (!cfg.output.json) return;
  for (const auto& r : recs)
    write_file_atomic(out_path(cfg, prefix + "run_" + std::to_string(r.seed) + ".json"),
                      run_report_json(cfg, built, r));
}

int cmd_run(const CommonArgs& a) {
  const auto cfg = resolve(a);
  const auto built = build_problem(cfg);
  const auto recs = run_experiment(cfg, {a.threads});
  write_run_reports(cfg, built, recs, "");
  const std::string csv = runs_csv(cfg, recs);
  if (cfg.output.csv) write_file_atomic(out_path(cfg, "runs.csv"), csv);
  std::cout << csv;
  return kExitOk;
}

int cmd_sweep(const CommonArgs& a, const std::string& list, bool particles) {
  auto cfg = resolve(a);
  std::vector<int> values = particles ? cfg.sweep_particles : cfg.sweep_pruning;
  if (!list.empty()) values = parse_int_list(list);
  const auto sweep = particles ? sweep_particles(cfg, values, {a.threads}) : sweep_pruning(cfg, values, {a.threads});
  if (cfg.output.json) {
    for (const auto& [param, recs] : sweep.runs) {
      auto point = cfg;
      (particles ? point.filter.initial_particles : point.filter.prune_period) = param;
      const auto built = build_problem(point);
      write_run_reports(point, built, recs, sweep.parameter_name + "_" + std::to_string(param) + "/");
    }
  }
  const std::string csv = sweep_csv(cfg, sweep);
  if (cfg.output.csv) write_file_atomic(out_path(cfg, particles ? "sweep_particles.csv" : "sweep_pruning.csv"), csv);
  std::cout << csv;
  return kExitOk;
}

int cmd_compare(const CommonArgs& a, int n0) {
  const auto cfg = resolve(a);
  const auto rows = compare_repeated_baseline(cfg, n0, {a.threads});
  const std::string csv = comparison_csv(cfg, n0, rows);
  if (cfg.output.csv) write_file_atomic(out_path(cfg, "comparison.csv"), csv);
  std::cout << csv;
  return kExitOk;
}

int cmd_verify(std::uint64_t seed) {
  const auto checks = run_verification(seed);
  int failed = 0;
  for (const auto& c : checks) {
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << ": " << c.detail << "\n";
    failed += c.passed ? 0 : 1;
  }
  std::cout << checks.size() - failed << "/" << checks.size() << " checks passed\n";
  return failed == 0 ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Particle-filtered latent diffusion for linear inverse problems"};
  app.require_subcommand(1);

  CommonArgs run_args, sp_args, sr_args, cmp_args;
  std::string ns, rs;
  int n0 = 10;
  std::uint64_t verify_seed = 1;

  auto* run = app.add_subcommand("run", "One filtered run per seed");
  add_common(run, run_args);
  auto* sp = app.add_subcommand("sweep-particles", "Sweep the initial particle count");
  add_common(sp, sp_args);
  sp->add_option("--ns", ns, "Particle counts, e.g. 1,5,10");
  auto* sr = app.add_subcommand("sweep-pruning", "Sweep the pruning period");
  add_common(sr, sr_args);
  sr->add_option("--rs", rs, "Pruning periods, e.g. 10,20,30");
  auto* cmp = app.add_subcommand("compare-baseline", "PFLD(N0) against N0 independent single-particle runs");
  add_common(cmp, cmp_args);
  cmp->add_option("--n0", n0, "Initial particle count")->check(CLI::PositiveNumber);
  auto* ver = app.add_subcommand("verify", "Run the oracle and property checks");
  ver->add_option("--seed", verify_seed, "Probe seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*sp) return cmd_sweep(sp_args, ns, true);
    if (*sr) return cmd_sweep(sr_args, rs, false);
    if (*cmp) return cmd_compare(cmp_args, n0);
    if (*ver) return cmd_verify(verify_seed);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
