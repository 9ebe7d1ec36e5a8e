// Acceptance suite: one [PASS]/[FAIL] line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "pfld/filter.hpp"
#include "pfld/harness/config.hpp"
#include "pfld/harness/experiment.hpp"
#include "pfld/harness/report_io.hpp"
#include "pfld/metrics.hpp"
#include "pfld/oracle.hpp"

using namespace pfld;
using namespace pfld::harness;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("[%s] C%d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

RunOptions threads() { return {static_cast<int>(std::max(1u, std::thread::hardware_concurrency()))}; }

ExperimentConfig shipped(const char* name) { return load_config(std::string(PFLD_CONFIG_DIR) + "/" + name); }

double se_of(const std::vector<double>& xs) { return stddev_of(xs) / std::sqrt(static_cast<double>(xs.size())); }

std::vector<double> column(const std::vector<RunRecord>& recs, const std::function<double(const RunRecord&)>& f) {
  std::vector<double> out;
  for (const auto& r : recs) out.push_back(f(r));
  return out;
}

Outcome degeneracy_bounds() {
  Rng rng(101);
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    const int n = 2 + static_cast<int>(rng.uniform() * 63);
    std::vector<double> w(static_cast<std::size_t>(n));
    const int kind = i % 3;
    for (double& v : w) {
      const double u = rng.uniform();
      v = kind == 0 ? -std::log(1 - u) : kind == 1 ? std::pow(u, 40.0) : (u < 0.1 ? u : 0.0);
    }
    if (std::all_of(w.begin(), w.end(), [](double v) { return v == 0.0; })) w[0] = 1.0;
    normalize_weights(std::span<double>(w));
    const double nd = degeneracy(w);
    if (!(nd >= 1.0 && nd <= n)) ++violations;
  }
  double worst_uniform = 0.0;
  for (int n = 2; n <= 64; ++n)
    worst_uniform = std::max(worst_uniform, std::abs(degeneracy(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n)) - n));
  return {violations == 0 && worst_uniform <= 1e-9,
          fmt("%d violations in 10000 vectors, uniform |N_d - N| max %.2e", violations, worst_uniform)};
}

Outcome resampling_unbiased() {
  Ensemble e;
  const std::vector<double> w{0.5, 0.3, 0.2};
  for (std::size_t i = 0; i < 3; ++i) {
    Particle p;
    p.id = e.next_id++;
    p.z = Vector::Zero(1);
    p.w = w[i];
    e.particles.push_back(p);
  }
  Rng rng(202);
  std::vector<double> counts(3, 0.0);
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) {
    Ensemble copy = e;
    resample(copy, ResampleScheme::kMultinomial, rng);
    for (const auto& p : copy.particles) counts[p.lineage.back()] += 1;
  }
  const double n = 3.0 * trials;
  double worst = 0.0;
  for (std::size_t k = 0; k < 3; ++k) worst = std::max(worst, std::abs(counts[k] - n * w[k]) / std::sqrt(n * w[k] * (1 - w[k])));
  return {worst <= 3.0, fmt("frequencies %.4f/%.4f/%.4f, worst deviation %.2f sigma", counts[0] / n, counts[1] / n,
                            counts[2] / n, worst)};
}

Outcome pruning_schedule() {
  auto cfg = shipped("gaussian_inpaint.json");
  cfg.schedule.steps = 1000;
  cfg.filter.initial_particles = 10;
  cfg.filter.prune_period = 20;
  const auto built = build_problem(cfg);
  const auto rec = run_single(cfg, built, 1);
  std::vector<int> sizes{rec.report.history.front().population};
  std::vector<int> at;
  for (const auto& h : rec.report.history)
    if (h.population_after != sizes.back()) {
      sizes.push_back(h.population_after);
      at.push_back(h.elapsed);
    }
  const bool ok = sizes == std::vector<int>{10, 5, 2, 1} && at == std::vector<int>{20, 40, 60};
  std::string seq, steps;
  for (int s : sizes) seq += (seq.empty() ? "" : ",") + std::to_string(s);
  for (int s : at) steps += (steps.empty() ? "" : ",") + std::to_string(s);
  return {ok, "population " + seq + " with transitions at elapsed " + steps};
}

Outcome gradient_fidelity() {
  const auto s = DiffusionSchedule::linear(1000, 1e-4, 0.02);
  Rng rng(404);
  const int n = 8;
  GaussianScoreModel model({rng.normal_vector(n) * 0.3, (rng.normal_vector(n).array().abs() + 0.2).matrix()});
  std::vector<bool> keep(n);
  for (int i = 0; i < n; ++i) keep[static_cast<std::size_t>(i)] = i % 3 != 1;
  const std::vector<std::pair<std::string, LinearOperator>> ops{
      {"identity", LinearOperator::identity(n)},
      {"mask", LinearOperator::inpaint(keep)},
      {"blur", LinearOperator::gaussian_blur({2, 4}, 1.0, 3)}};
  double worst = 0.0;
  for (const auto& [name, op] : ops) {
    const Vector x = rng.normal_vector(n);
    InverseProblem p{op, Codec::identity(n), make_measurement(op, x, 0.01, 5), x};
    for (int objective = 0; objective < 2; ++objective) {
      for (int i = 0; i < 50; ++i) {
        const int t = 1 + static_cast<int>(rng.uniform() * 999);
        const Vector z = rng.normal_vector(n);
        auto f = [&](const Vector& v) {
          return objective == 0 ? measurement_objective(v, t, p, model, s) : gluing_objective(v, t, p, model, s);
        };
        Vector fd(n);
        for (int k = 0; k < n; ++k) {
          const double h = 1e-5;
          Vector up = z, down = z;
          up[k] += h;
          down[k] -= h;
          fd[k] = (f(up) - f(down)) / (2 * h);
        }
        const Vector an = objective == 0 ? measurement_gradient(z, t, p, model, s, GradientMode::kAnalytic)
                                         : gluing_gradient(z, t, p, model, s, GradientMode::kAnalytic);
        worst = std::max(worst, (an - fd).norm() / std::max(an.norm(), fd.norm()));
      }
    }
  }
  return {worst <= 1e-4, fmt("worst relative error %.2e over 300 instances", worst)};
}

Outcome posterior_recovery() {
  auto cfg = shipped("gaussian_inpaint.json");
  cfg.filter.initial_particles = 1;
  cfg.seeds = parse_seed_list("1:200");
  const auto built = build_problem(cfg);
  const auto& post = *built.posterior;
  const auto recs = run_experiment(cfg, threads());
  bool ok = true;
  std::string detail = fmt("eta %.3g, T %d;", built.psld.eta.constant, cfg.schedule.steps);
  for (int i = 0; i < 2; ++i) {
    const auto xs = column(recs, [i](const RunRecord& r) { return r.estimate[i]; });
    const double mean = mean_of(xs), sd = stddev_of(xs), se = se_of(xs);
    const double z = std::abs(mean - post.mean[i]) / se;
    const double ratio = sd / post.stddev()[i];
    ok = ok && z <= 3.0 && std::abs(ratio - 1.0) <= 0.25;
    detail += fmt(" coord %d: mean %.5f vs %.5f (%.2f SE), std %.5f vs %.5f (ratio %.3f);", i, mean, post.mean[i], z, sd,
                  post.stddev()[i], ratio);
  }
  return {ok, detail};
}

Outcome particle_trend() {
  auto cfg = shipped("gaussian_inpaint.json");
  cfg.seeds = parse_seed_list("1:100");
  const auto sweep = sweep_particles(cfg, {1, 5, 10}, threads());
  std::vector<double> means, sds, ses;
  for (int n0 : {1, 5, 10}) {
    const auto xs = column(sweep.runs.at(n0), [](const RunRecord& r) { return *r.posterior_l2; });
    means.push_back(mean_of(xs));
    sds.push_back(stddev_of(xs));
    ses.push_back(se_of(xs));
  }
  bool mean_ok = true;
  for (std::size_t k = 1; k < 3; ++k)
    mean_ok = mean_ok && means[k] <= means[k - 1] + 2 * std::hypot(ses[k], ses[k - 1]);
  const bool std_ok = sds[2] <= sds[0];
  return {mean_ok && std_ok,
          fmt("posterior l2 mean %.4f/%.4f/%.4f (SE %.4f/%.4f/%.4f) %s; std %.4f/%.4f/%.4f, N0=10 vs N0=1 %s", means[0],
              means[1], means[2], ses[0], ses[1], ses[2], mean_ok ? "non-increasing" : "INCREASING", sds[0], sds[1],
              sds[2], std_ok ? "ok" : "NOT lower")};
}

Outcome mode_selection() {
  auto cfg = shipped("gmm_mode_selection.json");
  cfg.seeds = parse_seed_list("1:100");
  const auto built = build_problem(cfg);
  const auto prior = built.model->prior_descriptor();
  const auto grid = grid_posterior(prior, built.problem.op, built.problem.codec, built.problem.measurement,
                                   prior_box(prior, 7.0), 301);
  const double plus_mass = grid.mass_where([](const Vector& z) { return z[0] > 0.0; });
  const bool plus_dominant = plus_mass > 0.5;
  auto successes = [&](int n0) {
    auto c = cfg;
    c.filter.initial_particles = n0;
    int ok = 0;
    for (const auto& r : run_experiment(c, threads()))
      if ((r.estimate[0] > 0.0) == plus_dominant) ++ok;
    return ok;
  };
  const int s10 = successes(10), s1 = successes(1);
  return {plus_dominant && s10 >= 90 && s1 < s10,
          fmt("grid posterior mass in +mode %.6f; PFLD-10 %d/100, PFLD-1 %d/100 in the dominant basin", plus_mass, s10, s1)};
}

Outcome efficiency() {
  auto cfg = shipped("gaussian_inpaint.json");
  cfg.schedule.steps = 1000;
  cfg.filter.initial_particles = 10;
  cfg.filter.prune_period = 20;
  cfg.seeds = {1};
  const auto row = compare_repeated_baseline(cfg, 10, threads()).front();
  const bool ok = row.pfld_steps == 1280 && row.baseline_steps == 10000 && row.step_ratio >= 7.5;
  return {ok, fmt("PFLD-10 %zu steps (%.1f ms), repeated baseline %zu steps (%.1f ms), ratio %.3f; wall-clock not asserted",
                  row.pfld_steps, row.pfld_wall_ms, row.baseline_steps, row.baseline_wall_ms, row.step_ratio)};
}

Outcome pruning_tradeoff() {
  auto cfg = shipped("gaussian_inpaint.json");
  cfg.schedule.steps = 1000;
  cfg.filter.initial_particles = 10;
  cfg.seeds = parse_seed_list("1:100");
  const std::vector<int> rs{10, 20, 30};
  const auto sweep = sweep_pruning(cfg, rs, threads());
  std::vector<std::size_t> steps;
  std::vector<double> means, ses;
  bool counts_ok = true;
  for (int r : rs) {
    const auto& recs = sweep.runs.at(r);
    steps.push_back(recs.front().report.particle_steps);
    for (const auto& rec : recs) counts_ok = counts_ok && rec.report.particle_steps == steps.back();
    // Halving at R, 2R, 3R, then one particle: 10R + 5R + 2R + (T - 3R).
    counts_ok = counts_ok && steps.back() == static_cast<std::size_t>(cfg.schedule.steps + 14 * r);
    const auto xs = column(recs, [](const RunRecord& rec) { return *rec.posterior_l2; });
    means.push_back(mean_of(xs));
    ses.push_back(se_of(xs));
  }
  const bool increasing = steps[0] < steps[1] && steps[1] < steps[2];
  const bool error_ok = means[2] <= means[0] + 2 * std::hypot(ses[0], ses[2]);
  return {counts_ok && increasing && error_ok,
          fmt("particle steps %zu/%zu/%zu; posterior l2 mean %.4f/%.4f/%.4f (SE %.4f/%.4f/%.4f)", steps[0], steps[1],
              steps[2], means[0], means[1], means[2], ses[0], ses[1], ses[2])};
}

Outcome determinism() {
  bool ok = true;
  int compared = 0;
  for (const char* name : {"gaussian_inpaint.json", "gmm_mode_selection.json", "blur_8x8.json"}) {
    auto cfg = shipped(name);
    cfg.seeds = parse_seed_list("1:3");
    const auto built_a = build_problem(cfg), built_b = build_problem(cfg);
    const auto a = run_experiment(cfg, {1}), b = run_experiment(cfg, threads());
    for (std::size_t i = 0; i < a.size(); ++i, ++compared)
      ok = ok && run_report_json(cfg, built_a, a[i], false) == run_report_json(cfg, built_b, b[i], false);
  }
  auto cfg = shipped("gaussian_inpaint.json");
  cfg.seeds = parse_seed_list("1:4");
  ok = ok && sweep_csv(cfg, sweep_particles(cfg, {1, 3}, {1})) == sweep_csv(cfg, sweep_particles(cfg, {1, 3}, threads()));
  ok = ok && sweep_csv(cfg, sweep_pruning(cfg, {10, 20}, {1})) == sweep_csv(cfg, sweep_pruning(cfg, {10, 20}, threads()));
  const auto c1 = compare_repeated_baseline(cfg, 3, {1}), c2 = compare_repeated_baseline(cfg, 3, threads());
  for (std::size_t i = 0; i < c1.size(); ++i)
    ok = ok && c1[i].pfld_l2 == c2[i].pfld_l2 && c1[i].baseline_l2 == c2[i].baseline_l2 &&
         c1[i].baseline_residual_sq == c2[i].baseline_residual_sq && c1[i].pfld_steps == c2[i].pfld_steps;
  return {ok, fmt("%d run reports byte-identical; sweep and comparison outputs identical across reruns", compared)};
}

Outcome metric_units() {
  Rng rng(1111);
  Vector x(64);
  for (int i = 0; i < 64; ++i) x[i] = 0.1 + 0.8 * rng.uniform();
  const double p = psnr(x, x.array() + 0.1, 1.0);
  const double s = ssim(x, x, {8, 8}, 7, 1.0);
  return {std::abs(p - 20.0) <= 1e-9 && s == 1.0, fmt("PSNR %.12f dB, SSIM(x,x) %.15f", p, s)};
}

}  // namespace

int main() {
  report(1, "degeneracy bounds", degeneracy_bounds);
  report(2, "resampling unbiasedness", resampling_unbiased);
  report(3, "pruning schedule", pruning_schedule);
  report(4, "gradient fidelity", gradient_fidelity);
  report(5, "posterior recovery", posterior_recovery);
  report(6, "particle-count trend", particle_trend);
  report(7, "mode selection", mode_selection);
  report(8, "efficiency accounting", efficiency);
  report(9, "pruning-schedule tradeoff", pruning_tradeoff);
  report(10, "determinism", determinism);
  report(11, "metric units", metric_units);
  std::printf("%d/11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
