#include "pfld/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <thread>

namespace pfld::harness {

namespace {

// Runs body(i) for i in [0, n) on up to `threads` workers. Results must be
// written to per-index slots so ordering never depends on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, threads));
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < std::min(workers, n); ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Vector mixture_mean(const GmmPrior& prior) {
  Vector m = Vector::Zero(prior.dim());
  for (int k = 0; k < prior.components(); ++k)
    m += prior.weights[static_cast<std::size_t>(k)] * prior.means[static_cast<std::size_t>(k)];
  return m;
}

Vector draw_from_prior(const GmmPrior& prior, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5167a1, 0));
  const auto pick = multinomial_indices(prior.weights, 1, rng).front();
  Vector z = prior.means[pick];
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] += std::sqrt(prior.variances[pick][i]) * rng.normal();
  return z;
}

void add_summary(SweepResult& out, int parameter, const std::vector<RunRecord>& runs) {
  std::vector<std::pair<std::string, std::function<std::optional<double>(const RunRecord&)>>> metrics = {
      {"l2_error", [](const RunRecord& r) { return std::optional<double>(r.metrics.l2_error); }},
      {"posterior_l2", [](const RunRecord& r) { return r.posterior_l2; }},
      {"psnr", [](const RunRecord& r) { return std::optional<double>(r.metrics.psnr); }},
      {"ssim", [](const RunRecord& r) { return std::optional<double>(r.metrics.ssim); }},
      {"residual_sq", [](const RunRecord& r) { return std::optional<double>(r.metrics.residual_sq); }},
      {"particle_steps",
       [](const RunRecord& r) { return std::optional<double>(static_cast<double>(r.report.particle_steps)); }},
  };
  for (const auto& [name, get] : metrics) {
    std::vector<double> xs;
    for (const auto& r : runs)
      if (auto v = get(r)) xs.push_back(*v);
    if (xs.empty()) continue;
    out.rows.push_back({parameter, name, mean_of(xs), stddev_of(xs), static_cast<int>(xs.size())});
  }
}

}  // namespace

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

LinearOperator build_operator(const OperatorSpec& spec, ImageShape shape) {
  const int n = shape.size();
  switch (spec.kind) {
    case OperatorKind::kIdentity:
      return LinearOperator::identity(n);
    case OperatorKind::kInpaintMask: {
      if (spec.box) {
        const auto& b = *spec.box;
        return LinearOperator::inpaint_box(shape, b[0], b[1], b[2], b[3]);
      }
      std::vector<bool> keep(static_cast<std::size_t>(n), false);
      for (int idx : spec.observed) {
        if (idx < 0 || idx >= n) throw ConfigError("problem.operator.observed: index " + std::to_string(idx) + " out of range");
        keep[static_cast<std::size_t>(idx)] = true;
      }
      return LinearOperator::inpaint(std::move(keep));
    }
    case OperatorKind::kGaussianBlur:
      if (!spec.kernel.empty()) return LinearOperator::blur(shape, spec.kernel);
      return LinearOperator::gaussian_blur(shape, spec.blur_sigma, spec.blur_taps);
    case OperatorKind::kDownsample:
      return LinearOperator::downsample(shape, spec.factor);
  }
  throw ConfigError("problem.operator.kind: unsupported");
}

PsldConfig resolve_psld(const SamplerSpec& spec, const LinearOperator& op, const ScoreModel& model) {
  PsldConfig cfg;
  cfg.eta = StepSize{spec.eta, {}};
  cfg.gamma = StepSize{spec.gamma.value_or(0.1 * spec.eta), {}};
  cfg.glue_enabled = spec.glue.value_or(op.is_projector());
  cfg.gradient_mode = spec.gradient_mode.value_or(model.has_analytic_jacobian() ? GradientMode::kAnalytic
                                                                                 : GradientMode::kFiniteDifference);
  cfg.glue_reference = spec.glue_reference;
  cfg.stochastic = spec.stochastic;
  return cfg;
}

BuiltProblem build_problem(const ExperimentConfig& cfg) {
  const auto& p = cfg.problem;
  try {
    LinearOperator op = build_operator(p.op, p.shape);
    Codec codec = p.codec.kind == CodecKind::kIdentity ? Codec::identity(p.shape.size())
                                                       : Codec::orthonormal(p.shape.size(), p.codec.seed);
    auto model = std::shared_ptr<const ScoreModel>(make_score_model(p.prior));
    DiffusionSchedule schedule = DiffusionSchedule::linear(cfg.schedule.steps, cfg.schedule.beta_min,
                                                           cfg.schedule.beta_max, cfg.schedule.variance);
    const Vector x_star = p.signal ? *p.signal : codec.decode(draw_from_prior(p.prior, p.signal_seed));
    Measurement m = make_measurement(op, x_star, p.sigma_nu, p.measurement_seed);
    PsldConfig psld = resolve_psld(cfg.sampler, op, *model);

    BuiltProblem built{InverseProblem{op, codec, m, x_star},
                       model,
                       schedule,
                       psld,
                       x_star,
                       codec.decode(mixture_mean(p.prior)),
                       std::nullopt,
                       std::nullopt,
                       p.shape};
    if (p.prior.components() == 1 && p.sigma_nu > 0.0 && codec.latent_dim() <= 64) {
      const GaussianPrior g{p.prior.means.front(), p.prior.variances.front()};
      built.posterior = linear_gaussian_posterior(g, op, codec, m);
      built.posterior_mean_pixel = codec.decode(built.posterior->mean);
    }
    psld.validate(schedule.steps());
    return built;
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
}

RunRecord run_single(const ExperimentConfig& cfg, const BuiltProblem& built, std::uint64_t seed) {
  RunResult result = pfld_run(built.problem, *built.model, built.schedule, built.psld, cfg.filter, seed);
  RunRecord rec;
  rec.seed = seed;
  rec.initial_particles = cfg.filter.initial_particles;
  rec.prune_period = cfg.filter.prune_period;
  rec.label = cfg.filter.initial_particles == 1 ? "baseline-equivalent" : "pfld";
  rec.metrics = compute_metrics(built.true_signal, result.estimate, built.shape, cfg.metrics.max_value,
                                cfg.metrics.ssim_window, result.report.final_residual_sq);
  if (built.posterior_mean_pixel) rec.posterior_l2 = (result.estimate - *built.posterior_mean_pixel).norm();
  rec.prior_mean_l2 = (built.prior_mean_pixel - built.true_signal).norm();
  rec.estimate = std::move(result.estimate);
  rec.report = std::move(result.report);
  return rec;
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const BuiltProblem built = build_problem(cfg);
  std::vector<RunRecord> out(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), opts.threads, [&](std::size_t i) { out[i] = run_single(cfg, built, cfg.seeds[i]); });
  return out;
}

SweepResult sweep_particles(const ExperimentConfig& cfg, const std::vector<int>& counts, const RunOptions& opts) {
  SweepResult out;
  out.parameter_name = "N0";
  for (int n0 : counts) {
    if (n0 < 1) throw ConfigError("sweeps.particles: N0 must be >= 1");
    ExperimentConfig local = cfg;
    local.filter.initial_particles = n0;
    auto runs = run_experiment(local, opts);
    add_summary(out, n0, runs);
    out.runs[n0] = std::move(runs);
  }
  return out;
}

SweepResult sweep_pruning(const ExperimentConfig& cfg, const std::vector<int>& periods, const RunOptions& opts) {
  SweepResult out;
  out.parameter_name = "R";
  for (int r : periods) {
    if (r < 1) throw ConfigError("sweeps.pruning: R must be >= 1");
    ExperimentConfig local = cfg;
    local.filter.prune_period = r;
    auto runs = run_experiment(local, opts);
    add_summary(out, r, runs);
    out.runs[r] = std::move(runs);
  }
  return out;
}

std::uint64_t baseline_seed(std::uint64_t seed, int j) {
  return derive_seed(seed, 0xba5e11e, static_cast<std::uint64_t>(j));
}

std::vector<ComparisonRow> compare_repeated_baseline(const ExperimentConfig& cfg, int initial_particles,
                                                     const RunOptions& opts) {
  if (initial_particles < 1) throw ConfigError("compare-baseline: N0 must be >= 1");
  const BuiltProblem built = build_problem(cfg);
  ExperimentConfig pfld_cfg = cfg;
  pfld_cfg.filter.initial_particles = initial_particles;
  ExperimentConfig single_cfg = cfg;
  single_cfg.filter.initial_particles = 1;

  std::vector<ComparisonRow> rows(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), opts.threads, [&](std::size_t i) {
    const auto seed = cfg.seeds[i];
    ComparisonRow row;
    row.seed = seed;
    const RunRecord pf = run_single(pfld_cfg, built, seed);
    row.pfld_l2 = pf.metrics.l2_error;
    row.pfld_posterior_l2 = pf.posterior_l2;
    row.pfld_residual_sq = pf.metrics.residual_sq;
    row.pfld_steps = pf.report.particle_steps;
    row.pfld_wall_ms = pf.report.wall_ms;

    std::optional<RunRecord> best;
    for (int j = 0; j < initial_particles; ++j) {
      // N0 = 1 compares the run against itself.
      const auto s = initial_particles == 1 ? seed : baseline_seed(seed, j);
      RunRecord single = run_single(single_cfg, built, s);
      row.baseline_steps += single.report.particle_steps;
      row.baseline_wall_ms += single.report.wall_ms;
      if (!best || single.metrics.residual_sq < best->metrics.residual_sq) best = std::move(single);
    }
    row.baseline_l2 = best->metrics.l2_error;
    row.baseline_posterior_l2 = best->posterior_l2;
    row.baseline_residual_sq = best->metrics.residual_sq;
    row.step_ratio = static_cast<double>(row.baseline_steps) / static_cast<double>(row.pfld_steps);
    rows[i] = std::move(row);
  });
  return rows;
}

std::size_t expected_particle_steps(int steps, int initial_particles, int prune_period) {
  std::size_t total = 0;
  int n = initial_particles;
  for (int e = 1; e <= steps; ++e) {
    total += static_cast<std::size_t>(n);
    if (n > 1 && e % prune_period == 0) n /= 2;
  }
  return total;
}

}  // namespace pfld::harness
