#pragma once

#include <string>
#include <vector>

#include "pfld/harness/experiment.hpp"

namespace pfld::harness {

/// Full run report: config echo, per-step trajectory, estimate, metrics,
/// step counts, seed. Wall-clock fields live under "timing" and are
/// omitted when include_timing is false.
std::string run_report_json(const ExperimentConfig& cfg, const BuiltProblem& built, const RunRecord& record,
                            bool include_timing = true);

// CSV schemas (header row included). Every row carries config_hash.
//   runs:        config_hash,seed,label,N0,R,psnr,ssim,l2_error,posterior_l2,prior_mean_l2,residual_sq,
//                particle_steps,wall_ms
//   sweep:       config_hash,seeds,<N0|R>,metric,mean,std,n_seeds
//   comparison:  config_hash,seed,N0,pfld_l2,pfld_posterior_l2,pfld_residual_sq,pfld_steps,baseline_l2,
//                baseline_posterior_l2,baseline_residual_sq,baseline_steps,step_ratio,pfld_wall_ms,
//                baseline_wall_ms
std::string runs_csv(const ExperimentConfig& cfg, const std::vector<RunRecord>& records);
std::string sweep_csv(const ExperimentConfig& cfg, const SweepResult& sweep);
std::string comparison_csv(const ExperimentConfig& cfg, int initial_particles, const std::vector<ComparisonRow>& rows);

/// Writes via a temporary file and rename; creates parent directories.
void write_file_atomic(const std::string& path, const std::string& content);

/// Compact description of a seed list for aggregate rows: "base:count" when
/// contiguous, otherwise the comma-joined list.
std::string describe_seeds(const std::vector<std::uint64_t>& seeds);

}  // namespace pfld::harness
