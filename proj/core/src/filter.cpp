#include "pfld/filter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace pfld {

namespace {

constexpr std::uint64_t kInitStream = ~std::uint64_t{0};
constexpr std::uint64_t kResampleStream = ~std::uint64_t{0} - 1;

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

const char* to_string(ResampleScheme scheme) {
  return scheme == ResampleScheme::kSystematic ? "systematic" : "multinomial";
}

void FilterConfig::validate() const {
  require(initial_particles >= 1, "filter: N0 must be >= 1");
  require(std::isfinite(threshold_ratio) && threshold_ratio >= 0.0 && threshold_ratio <= 1.0,
          "filter: resampling threshold ratio must lie in [0, 1]");
  require(prune_period >= 1, "filter: R must be >= 1");
}

std::vector<double> Ensemble::weights() const {
  std::vector<double> w;
  w.reserve(particles.size());
  for (const auto& p : particles) w.push_back(p.w);
  return w;
}

const Particle& Ensemble::best() const {
  if (particles.empty()) throw NumericalError("ensemble is empty");
  return *std::max_element(particles.begin(), particles.end(),
                           [](const Particle& a, const Particle& b) { return a.w < b.w; });
}

Ensemble init_ensemble(int n0, int dim, int steps, std::uint64_t seed) {
  require(n0 >= 1, "init_ensemble: N0 must be >= 1");
  require(dim >= 1, "init_ensemble: dimension must be >= 1");
  Ensemble e;
  e.t = steps;
  e.initial_size = n0;
  Rng rng(derive_seed(seed, kInitStream, 0));
  e.particles.reserve(static_cast<std::size_t>(n0));
  for (int i = 0; i < n0; ++i) {
    Particle p;
    p.id = e.next_id++;
    p.z = rng.normal_vector(dim);
    p.w = 1.0 / n0;
    e.particles.push_back(std::move(p));
  }
  return e;
}

double update_weight(double w_prev, double residual_sq) {
  require(w_prev >= 0.0 && residual_sq >= 0.0, "update_weight: inputs must be non-negative");
  return w_prev / (residual_sq + 1.0);
}

void normalize_weights(std::span<double> weights) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("normalize_weights: weight sum is zero or non-finite");
  for (double& w : weights) w /= total;
}

void normalize_weights(Ensemble& ensemble) {
  auto w = ensemble.weights();
  normalize_weights(std::span<double>(w));
  for (std::size_t i = 0; i < w.size(); ++i) ensemble.particles[i].w = w[i];
}

double degeneracy(std::span<const double> weights) {
  require(!weights.empty(), "degeneracy: no weights");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  require(std::abs(total - 1.0) <= 1e-9, "degeneracy: weights are not normalized");
  double sq = 0.0;
  for (double w : weights) sq += w * w;
  const double n = static_cast<double>(weights.size());
  // Round-off can push 1 / sum w^2 a hair outside [1, N].
  return std::clamp(1.0 / sq, 1.0, n);
}

double degeneracy(const Ensemble& ensemble) {
  const auto w = ensemble.weights();
  return degeneracy(std::span<const double>(w));
}

std::vector<std::size_t> multinomial_indices(std::span<const double> weights, std::size_t count, Rng& rng) {
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  const double total = cdf.back();
  std::vector<std::size_t> out(count);
  for (auto& idx : out) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    idx = std::min(static_cast<std::size_t>(it - cdf.begin()), weights.size() - 1);
  }
  return out;
}

std::vector<std::size_t> systematic_indices(std::span<const double> weights, std::size_t count, Rng& rng) {
  std::vector<double> cdf(weights.size());
  std::partial_sum(weights.begin(), weights.end(), cdf.begin());
  const double total = cdf.back();
  const double step = total / static_cast<double>(count);
  double u = rng.uniform() * step;
  std::vector<std::size_t> out(count);
  std::size_t j = 0;
  for (auto& idx : out) {
    while (j + 1 < cdf.size() && cdf[j] <= u) ++j;
    idx = j;
    u += step;
  }
  return out;
}

void resample(Ensemble& ensemble, ResampleScheme scheme, Rng& rng) {
  const auto w = ensemble.weights();
  const auto n = w.size();
  const auto picks = scheme == ResampleScheme::kSystematic ? systematic_indices(w, n, rng)
                                                           : multinomial_indices(w, n, rng);
  std::vector<Particle> next;
  next.reserve(n);
  for (std::size_t idx : picks) {
    const Particle& parent = ensemble.particles[idx];
    Particle child = parent;
    child.id = ensemble.next_id++;
    child.lineage.push_back(parent.id);
    child.w = 1.0 / static_cast<double>(n);
    next.push_back(std::move(child));
  }
  ensemble.particles = std::move(next);
}

bool maybe_resample(Ensemble& ensemble, const FilterConfig& cfg, Rng& rng) {
  const double nd = degeneracy(ensemble);
  if (nd > cfg.threshold(ensemble.size())) return false;
  resample(ensemble, cfg.scheme, rng);
  return true;
}

bool prune_due(int elapsed, int period, int population) {
  return population > 1 && elapsed > 0 && elapsed % period == 0;
}

bool prune(Ensemble& ensemble) {
  const int n = ensemble.size();
  if (n <= 1) return false;
  auto& ps = ensemble.particles;
  std::stable_sort(ps.begin(), ps.end(), [](const Particle& a, const Particle& b) {
    if (a.w != b.w) return a.w > b.w;
    return a.id > b.id;
  });
  ps.resize(static_cast<std::size_t>(n / 2));
  std::sort(ps.begin(), ps.end(), [](const Particle& a, const Particle& b) { return a.id < b.id; });
  normalize_weights(ensemble);
  return true;
}

RunResult pfld_run(const InverseProblem& problem, const ScoreModel& model, const DiffusionSchedule& s,
                   const PsldConfig& psld, const FilterConfig& filter, std::uint64_t seed) {
  problem.validate();
  psld.validate(s.steps());
  filter.validate();
  require(model.dim() == problem.latent_dim(), "pfld_run: score model and codec latent dimensions differ");

  const auto started = std::chrono::steady_clock::now();
  const int T = s.steps();
  Ensemble ens = init_ensemble(filter.initial_particles, problem.latent_dim(), T, seed);

  RunReport report;
  report.seed = seed;
  report.steps = T;
  report.initial_particles = filter.initial_particles;
  report.prune_period = filter.prune_period;

  for (int t = T; t >= 1; --t) {
    const int elapsed = T - t + 1;
    StepRecord rec;
    rec.t = t;
    rec.elapsed = elapsed;
    rec.population = ens.size();

    std::vector<Particle> alive;
    alive.reserve(ens.particles.size());
    std::vector<double> residuals;
    for (auto& p : ens.particles) {
      Rng rng(derive_seed(seed, p.id, static_cast<std::uint64_t>(t)));
      ++report.particle_steps;
      try {
        StepOutput out = psld_step(p.z, t, problem, model, s, psld, rng);
        p.z = std::move(out.z_next);
        p.z_hat0 = std::move(out.z_hat0);
        p.residual_sq = out.residual_sq;
        p.w = update_weight(p.w, out.residual_sq);
        residuals.push_back(out.residual_sq);
        alive.push_back(std::move(p));
      } catch (const NumericalError& err) {
        report.diagnostics.push_back("particle " + std::to_string(p.id) + " dropped at t=" + std::to_string(t) +
                                     ": " + err.what());
      }
    }
    if (alive.empty()) throw NumericalError("pfld_run: every particle produced a non-finite state");
    ens.particles = std::move(alive);

    normalize_weights(ens);
    rec.ess = degeneracy(ens);
    if (!residuals.empty()) {
      rec.residual_min = *std::min_element(residuals.begin(), residuals.end());
      rec.residual_max = *std::max_element(residuals.begin(), residuals.end());
      rec.residual_median = median_of(residuals);
    }

    // Nothing follows the last transition; keep the final weights as they are.
    const bool last = t == 1;
    Rng resample_rng(derive_seed(seed, kResampleStream, static_cast<std::uint64_t>(t)));
    rec.resampled = !last && maybe_resample(ens, filter, resample_rng);
    if (rec.resampled) ++report.resample_events;

    if (!last && prune_due(elapsed, filter.prune_period, ens.size())) {
      rec.pruned = prune(ens);
      if (rec.pruned) report.prune_elapsed.push_back(elapsed);
    }
    rec.population_after = ens.size();
    ens.t = t - 1;
    ens.history.push_back(rec);
  }

  report.history = ens.history;
  const Particle& best = ens.best();
  RunResult result;
  result.latent_estimate = best.z_hat0;
  result.estimate = problem.codec.decode(best.z_hat0);
  report.final_particle_id = best.id;
  report.final_lineage_depth = best.lineage.size();
  report.final_residual_sq = best.residual_sq;
  report.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  result.report = std::move(report);
  return result;
}

}  // namespace pfld
