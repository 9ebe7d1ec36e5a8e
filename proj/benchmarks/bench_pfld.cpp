#include <benchmark/benchmark.h>

#include "pfld/filter.hpp"

using namespace pfld;

namespace {

const DiffusionSchedule& schedule() {
  static const auto s = DiffusionSchedule::linear(200, 1e-4, 0.02);
  return s;
}

GmmPrior mixture(int dim) {
  GmmPrior p;
  for (int k = 0; k < 3; ++k) {
    p.weights.push_back(1.0 / 3.0);
    p.means.push_back(Vector::Constant(dim, k - 1.0));
    p.variances.push_back(Vector::Constant(dim, 0.5 + 0.25 * k));
  }
  p.weights.back() = 1.0 - 2.0 / 3.0;
  return p;
}

InverseProblem inpainting(int dim) {
  std::vector<bool> keep(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) keep[static_cast<std::size_t>(i)] = i % 2 == 0;
  const auto op = LinearOperator::inpaint(keep);
  const Vector x = Vector::LinSpaced(dim, -1.0, 1.0);
  return {op, Codec::identity(dim), make_measurement(op, x, 0.01, 1), x};
}

}  // namespace

static void BM_GaussianScore(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  GaussianScoreModel model({Vector::Zero(dim), Vector::Ones(dim)});
  const Vector z = Vector::Ones(dim);
  for (auto _ : state) benchmark::DoNotOptimize(model.score(z, 100, schedule()));
}
BENCHMARK(BM_GaussianScore)->Arg(2)->Arg(64);

static void BM_GmmScore(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  GmmScoreModel model(mixture(dim));
  const Vector z = Vector::Ones(dim);
  for (auto _ : state) benchmark::DoNotOptimize(model.score(z, 100, schedule()));
}
BENCHMARK(BM_GmmScore)->Arg(2)->Arg(64);

static void BM_PsldStep(benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const bool analytic = state.range(1) != 0;
  const auto problem = inpainting(dim);
  std::unique_ptr<ScoreModel> model;
  if (analytic) model = std::make_unique<GaussianScoreModel>(GaussianPrior{Vector::Zero(dim), Vector::Ones(dim)});
  else model = std::make_unique<GmmScoreModel>(mixture(dim));
  PsldConfig cfg;
  cfg.gradient_mode = analytic ? GradientMode::kAnalytic : GradientMode::kFiniteDifference;
  Rng rng(1);
  const Vector z = Vector::Constant(dim, 0.3);
  for (auto _ : state) benchmark::DoNotOptimize(psld_step(z, 100, problem, *model, schedule(), cfg, rng));
}
BENCHMARK(BM_PsldStep)->Args({2, 1})->Args({64, 1})->Args({2, 0})->Args({16, 0});

static void BM_PfldRun(benchmark::State& state) {
  const auto problem = inpainting(2);
  GaussianScoreModel model({Vector::Zero(2), Vector::Ones(2)});
  FilterConfig filter;
  filter.initial_particles = static_cast<int>(state.range(0));
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  for (auto _ : state) {
    const auto res = pfld_run(problem, model, schedule(), PsldConfig{}, filter, ++seed);
    steps += res.report.particle_steps;
  }
  state.counters["particle_steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_PfldRun)->Arg(1)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

static void BM_Resample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> w(n);
  Rng rng(2);
  for (double& v : w) v = rng.uniform();
  normalize_weights(std::span<double>(w));
  for (auto _ : state) benchmark::DoNotOptimize(multinomial_indices(w, n, rng));
}
BENCHMARK(BM_Resample)->Arg(10)->Arg(1000);

BENCHMARK_MAIN();
