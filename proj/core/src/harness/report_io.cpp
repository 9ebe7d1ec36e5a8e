#include "pfld/harness/report_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace pfld::harness {

namespace {

using nlohmann::json;

json vec(const Vector& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

// Shortest round-trip representation, locale independent.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

}  // namespace

std::string describe_seeds(const std::vector<std::uint64_t>& seeds) {
  bool contiguous = !seeds.empty();
  for (std::size_t i = 1; i < seeds.size() && contiguous; ++i) contiguous = seeds[i] == seeds[0] + i;
  if (contiguous && seeds.size() > 1) return std::to_string(seeds.front()) + ":" + std::to_string(seeds.size());
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out += (i ? ";" : "") + std::to_string(seeds[i]);
  return out;
}

std::string run_report_json(const ExperimentConfig& cfg, const BuiltProblem& built, const RunRecord& rec,
                            bool include_timing) {
  json j;
  j["config"] = json::parse(canonical_json(cfg));
  j["config_hash"] = config_hash(cfg);
  j["seed"] = rec.seed;
  j["label"] = rec.label;
  j["N0"] = rec.initial_particles;
  j["R"] = rec.prune_period;
  j["T"] = rec.report.steps;

  json metrics;
  metrics["psnr"] = rec.metrics.psnr;
  metrics["ssim"] = rec.metrics.ssim;
  metrics["l2_error"] = rec.metrics.l2_error;
  metrics["residual_sq"] = rec.metrics.residual_sq;
  metrics["posterior_l2"] = rec.posterior_l2 ? json(*rec.posterior_l2) : json(nullptr);
  metrics["prior_mean_l2"] = rec.prior_mean_l2;
  metrics["perceptual_metric"] = "LPIPS not computed; l2_error and residual_sq reported instead";
  j["metrics"] = metrics;

  j["counts"] = {{"particle_steps", rec.report.particle_steps},
                 {"resample_events", rec.report.resample_events},
                 {"prune_elapsed", rec.report.prune_elapsed}};
  j["final"] = {{"particle_id", rec.report.final_particle_id},
                {"lineage_depth", rec.report.final_lineage_depth},
                {"residual_sq", rec.report.final_residual_sq}};
  j["estimate"] = vec(rec.estimate);
  j["true_signal"] = vec(built.true_signal);
  j["measurement"] = {{"y", vec(built.problem.measurement.y)},
                      {"sigma_nu", built.problem.measurement.sigma_nu},
                      {"operator", built.problem.measurement.operator_id}};
  if (built.posterior_mean_pixel) j["posterior_mean"] = vec(*built.posterior_mean_pixel);

  json steps = json::array();
  for (const auto& s : rec.report.history) {
    steps.push_back({{"t", s.t},
                     {"elapsed", s.elapsed},
                     {"N", s.population},
                     {"ess", s.ess},
                     {"residual_min", s.residual_min},
                     {"residual_median", s.residual_median},
                     {"residual_max", s.residual_max},
                     {"resampled", s.resampled},
                     {"pruned", s.pruned},
                     {"N_after", s.population_after}});
  }
  j["steps"] = std::move(steps);
  j["diagnostics"] = rec.report.diagnostics;
  if (include_timing) j["timing"] = {{"wall_ms", rec.report.wall_ms}};
  return j.dump(2) + "\n";
}

std::string runs_csv(const ExperimentConfig& cfg, const std::vector<RunRecord>& records) {
  std::ostringstream os;
  const auto hash = config_hash(cfg);
  os << "config_hash,seed,label,N0,R,psnr,ssim,l2_error,posterior_l2,prior_mean_l2,residual_sq,particle_steps,"
        "wall_ms\n";
  for (const auto& r : records) {
    os << hash << ',' << r.seed << ',' << r.label << ',' << r.initial_particles << ',' << r.prune_period << ','
       << num(r.metrics.psnr) << ',' << num(r.metrics.ssim) << ',' << num(r.metrics.l2_error) << ','
       << opt(r.posterior_l2) << ',' << num(r.prior_mean_l2) << ',' << num(r.metrics.residual_sq) << ','
       << r.report.particle_steps << ',' << num(r.report.wall_ms) << '\n';
  }
  return os.str();
}

std::string sweep_csv(const ExperimentConfig& cfg, const SweepResult& sweep) {
  std::ostringstream os;
  const auto hash = config_hash(cfg);
  const auto seeds = describe_seeds(cfg.seeds);
  os << "config_hash,seeds," << sweep.parameter_name << ",metric,mean,std,n_seeds\n";
  for (const auto& row : sweep.rows) {
    os << hash << ',' << seeds << ',' << row.parameter << ',' << row.metric << ',' << num(row.mean) << ','
       << num(row.std) << ',' << row.n_seeds << '\n';
  }
  return os.str();
}

std::string comparison_csv(const ExperimentConfig& cfg, int initial_particles, const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  const auto hash = config_hash(cfg);
  os << "config_hash,seed,N0,pfld_l2,pfld_posterior_l2,pfld_residual_sq,pfld_steps,baseline_l2,"
        "baseline_posterior_l2,baseline_residual_sq,baseline_steps,step_ratio,pfld_wall_ms,baseline_wall_ms\n";
  for (const auto& r : rows) {
    os << hash << ',' << r.seed << ',' << initial_particles << ',' << num(r.pfld_l2) << ',' << opt(r.pfld_posterior_l2)
       << ',' << num(r.pfld_residual_sq) << ',' << r.pfld_steps << ',' << num(r.baseline_l2) << ','
       << opt(r.baseline_posterior_l2) << ',' << num(r.baseline_residual_sq) << ',' << r.baseline_steps << ','
       << num(r.step_ratio) << ',' << num(r.pfld_wall_ms) << ',' << num(r.baseline_wall_ms) << '\n';
  }
  return os.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  if (ec) throw ConfigError("output: cannot create directory '" + target.parent_path().string() + "': " + ec.message());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("output: cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw ConfigError("output: write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, target, ec);
  if (ec) throw ConfigError("output: cannot move '" + tmp.string() + "' into place: " + ec.message());
}

}  // namespace pfld::harness
