#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pfld/filter.hpp"
#include "pfld/harness/config.hpp"
#include "pfld/metrics.hpp"
#include "pfld/oracle.hpp"

namespace pfld::harness {

/// A config resolved into concrete objects: operator, codec, measurement,
/// score model, schedule, plus the oracle posterior when one exists.
struct BuiltProblem {
  InverseProblem problem;
  std::shared_ptr<const ScoreModel> model;
  DiffusionSchedule schedule;
  PsldConfig psld;
  Vector true_signal;
  Vector prior_mean_pixel;
  std::optional<GaussianPosterior> posterior;  // latent space, Gaussian priors only
  std::optional<Vector> posterior_mean_pixel;
  ImageShape shape;
};

LinearOperator build_operator(const OperatorSpec& spec, ImageShape shape);
/// Fills unset sampler options: gamma = 0.1 eta; gluing on for projector
/// operators; analytic gradients for closed-form Jacobians.
PsldConfig resolve_psld(const SamplerSpec& spec, const LinearOperator& op, const ScoreModel& model);
BuiltProblem build_problem(const ExperimentConfig& cfg);

struct RunRecord {
  std::uint64_t seed = 0;
  int initial_particles = 0;
  int prune_period = 0;
  std::string label;  // "baseline-equivalent" for N0 = 1
  MetricReport metrics;
  std::optional<double> posterior_l2;
  double prior_mean_l2 = 0.0;
  Vector estimate;
  RunReport report;
};

struct RunOptions {
  int threads = 1;
};

/// One filtered run per seed, in seed order.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});
RunRecord run_single(const ExperimentConfig& cfg, const BuiltProblem& built, std::uint64_t seed);

struct SummaryRow {
  int parameter = 0;  // N0 or R
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  int n_seeds = 0;
};

struct SweepResult {
  std::string parameter_name;  // "N0" or "R"
  std::vector<SummaryRow> rows;
  std::map<int, std::vector<RunRecord>> runs;
};

SweepResult sweep_particles(const ExperimentConfig& cfg, const std::vector<int>& counts, const RunOptions& opts = {});
SweepResult sweep_pruning(const ExperimentConfig& cfg, const std::vector<int>& periods, const RunOptions& opts = {});

struct ComparisonRow {
  std::uint64_t seed = 0;
  double pfld_l2 = 0.0;
  std::optional<double> pfld_posterior_l2;
  double pfld_residual_sq = 0.0;
  std::size_t pfld_steps = 0;
  double pfld_wall_ms = 0.0;
  double baseline_l2 = 0.0;  // best-of-N0 single-particle runs, chosen by residual
  std::optional<double> baseline_posterior_l2;
  double baseline_residual_sq = 0.0;
  std::size_t baseline_steps = 0;
  double baseline_wall_ms = 0.0;
  double step_ratio = 0.0;  // baseline_steps / pfld_steps
};

/// PFLD(N0) once per seed against N0 independent single-particle runs.
std::vector<ComparisonRow> compare_repeated_baseline(const ExperimentConfig& cfg, int initial_particles,
                                                     const RunOptions& opts = {});

/// Seed of the j-th independent baseline run for `seed`.
std::uint64_t baseline_seed(std::uint64_t seed, int j);

/// Closed-form particle-step count: sum over reverse steps of the population.
std::size_t expected_particle_steps(int steps, int initial_particles, int prune_period);

double mean_of(const std::vector<double>& xs);
double stddev_of(const std::vector<double>& xs);  // sample (n - 1) standard deviation

}  // namespace pfld::harness
