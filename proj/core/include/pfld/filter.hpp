#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pfld/common.hpp"
#include "pfld/rng.hpp"
#include "pfld/sampler.hpp"

namespace pfld {

enum class ResampleScheme { kMultinomial, kSystematic };

const char* to_string(ResampleScheme scheme);

struct FilterConfig {
  int initial_particles = 10;
  // Resample when N_d <= threshold_ratio * N, N being the current population.
  double threshold_ratio = 0.5;
  // Halve the population after every `prune_period` completed reverse steps.
  int prune_period = 20;
  ResampleScheme scheme = ResampleScheme::kMultinomial;

  void validate() const;
  double threshold(int population) const { return threshold_ratio * population; }
};

struct Particle {
  std::uint64_t id = 0;
  std::vector<std::uint64_t> lineage;  // ancestor ids, oldest first
  Vector z;
  double w = 0.0;
  Vector z_hat0;
  double residual_sq = 0.0;
};

struct StepRecord {
  int t = 0;        // transition t -> t - 1
  int elapsed = 0;  // completed reverse steps including this one
  int population = 0;
  double ess = 0.0;
  double residual_min = 0.0;
  double residual_median = 0.0;
  double residual_max = 0.0;
  bool resampled = false;
  bool pruned = false;
  int population_after = 0;
};

struct Ensemble {
  std::vector<Particle> particles;
  int t = 0;
  int initial_size = 0;
  std::uint64_t next_id = 0;
  std::vector<StepRecord> history;

  int size() const { return static_cast<int>(particles.size()); }
  std::vector<double> weights() const;
  const Particle& best() const;
};

/// N0 standard-normal states with uniform weights, positioned at t = T.
Ensemble init_ensemble(int n0, int dim, int steps, std::uint64_t seed);

/// Cauchy (kappa = 1) likelihood factor: w / (residual + 1).
double update_weight(double w_prev, double residual_sq);

void normalize_weights(std::span<double> weights);
void normalize_weights(Ensemble& ensemble);

/// N_d = 1 / sum w^2; expects weights summing to one within 1e-9.
double degeneracy(std::span<const double> weights);
double degeneracy(const Ensemble& ensemble);

std::vector<std::size_t> multinomial_indices(std::span<const double> weights, std::size_t count, Rng& rng);
std::vector<std::size_t> systematic_indices(std::span<const double> weights, std::size_t count, Rng& rng);

/// Draws a fresh equally weighted population (same size) from the current one.
void resample(Ensemble& ensemble, ResampleScheme scheme, Rng& rng);

/// Resamples when N_d <= N_th; returns whether it did.
bool maybe_resample(Ensemble& ensemble, const FilterConfig& cfg, Rng& rng);

/// True when the `elapsed`-th completed step is a pruning step.
bool prune_due(int elapsed, int period, int population);

/// Keeps the floor(N / 2) largest weights (ties: the lower id goes first),
/// then renormalises. No-op for N <= 1.
bool prune(Ensemble& ensemble);

struct RunReport {
  std::uint64_t seed = 0;
  int steps = 0;
  int initial_particles = 0;
  int prune_period = 0;
  std::size_t particle_steps = 0;
  int resample_events = 0;
  std::vector<int> prune_elapsed;
  std::vector<StepRecord> history;
  std::vector<std::string> diagnostics;
  std::uint64_t final_particle_id = 0;
  std::size_t final_lineage_depth = 0;
  double final_residual_sq = 0.0;
  double wall_ms = 0.0;
};

struct RunResult {
  Vector estimate;  // decoded z_hat0 of the highest-weight survivor
  Vector latent_estimate;
  RunReport report;
};

/// Particle-filtered guided reverse diffusion, t = T -> 1. Per step: guided
/// step for every particle, Cauchy weight update, normalisation,
/// threshold resampling, scheduled pruning.
RunResult pfld_run(const InverseProblem& problem, const ScoreModel& model, const DiffusionSchedule& s,
                   const PsldConfig& psld, const FilterConfig& filter, std::uint64_t seed);

}  // namespace pfld
