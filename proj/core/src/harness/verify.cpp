#include "pfld/harness/verify.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "pfld/filter.hpp"
#include "pfld/harness/experiment.hpp"
#include "pfld/oracle.hpp"
#include "pfld/sampler.hpp"

namespace pfld::harness {

namespace {

double rel_err(const Vector& a, const Vector& b) {
  const double scale = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / scale;
}

double rel_err(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

std::vector<std::pair<std::string, LinearOperator>> probe_operators(Rng& rng) {
  std::vector<bool> keep(12);
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = rng.uniform() < 0.6;
  return {
      {"identity", LinearOperator::identity(12)},
      {"inpaint", LinearOperator::inpaint(keep)},
      {"blur-1d", LinearOperator::gaussian_blur({1, 12}, 1.2, 5)},
      {"blur-2d", LinearOperator::gaussian_blur({3, 4}, 0.8, 3)},
      {"downsample-1d", LinearOperator::downsample({1, 12}, 2)},
      {"downsample-2d", LinearOperator::downsample({4, 6}, 2)},
  };
}

CheckResult check(const std::string& name, double worst, double tol) {
  std::ostringstream os;
  os << "worst " << worst << " (tol " << tol << ")";
  return {name, worst <= tol, os.str()};
}

}  // namespace

std::vector<CheckResult> run_verification(std::uint64_t seed) {
  std::vector<CheckResult> out;
  Rng rng(seed);

  for (auto& [name, op] : probe_operators(rng)) {
    double worst_adj = 0.0, worst_lin = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vector x = rng.normal_vector(op.in_dim());
      const Vector x2 = rng.normal_vector(op.in_dim());
      const Vector u = rng.normal_vector(op.out_dim());
      worst_adj = std::max(worst_adj, rel_err(op.apply(x).dot(u), x.dot(op.adjoint(u))));
      const double a = rng.normal(), b = rng.normal();
      worst_lin = std::max(worst_lin, rel_err(op.apply(a * x + b * x2), a * op.apply(x) + b * op.apply(x2)));
    }
    out.push_back(check("operator adjoint " + name, worst_adj, 1e-10));
    out.push_back(check("operator linearity " + name, worst_lin, 1e-10));
  }

  {
    const Codec codec = Codec::orthonormal(6, seed);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vector z = rng.normal_vector(6);
      worst = std::max(worst, (codec.encode(codec.decode(z)) - z).cwiseAbs().maxCoeff());
    }
    out.push_back(check("codec left inverse", worst, 1e-8));
  }

  const auto sched = DiffusionSchedule::linear(1000, 1e-4, 0.02);
  {
    double worst = 0.0;
    bool monotone = true;
    for (int t = 1; t <= sched.steps(); ++t) {
      monotone = monotone && sched.alpha_bar(t) < sched.alpha_bar(t - 1);
      const auto c = sched.marginal(t);
      worst = std::max(worst, std::abs(c.signal_scale * c.signal_scale + c.noise_scale * c.noise_scale - 1.0));
      monotone = monotone && sched.sigma_tilde(t) <= std::sqrt(sched.beta(t));
    }
    auto r = check("schedule variance preservation", worst, 1e-12);
    r.passed = r.passed && monotone;
    out.push_back(r);
  }

  const GmmPrior gmm{{0.3, 0.45, 0.25},
                     {Vector::Constant(2, -2.0), (Vector(2) << 1.5, 0.5).finished(), (Vector(2) << 0.0, 2.5).finished()},
                     {(Vector(2) << 0.5, 1.0).finished(), (Vector(2) << 0.3, 0.8).finished(), Vector::Constant(2, 1.2)}};
  {
    const GmmScoreModel model(gmm);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const int t = 1 + static_cast<int>(rng.uniform() * 999);
      const Vector z = 2.0 * rng.normal_vector(2);
      const double ab = sched.alpha_bar(t);
      const double h = 1e-4 * std::max(1.0, z.cwiseAbs().maxCoeff());
      Vector fd(2);
      for (int k = 0; k < 2; ++k) {
        Vector up = z, down = z;
        up[k] += h;
        down[k] -= h;
        fd[k] = (diffused_log_density(gmm, up, ab) - diffused_log_density(gmm, down, ab)) / (2 * h);
      }
      worst = std::max(worst, rel_err(model.score(z, t, sched), fd));
    }
    out.push_back(check("gmm score vs finite differences", worst, 1e-5));
  }

  {
    const GaussianScoreModel model(GaussianPrior{Vector::Zero(12), Vector::Constant(12, 0.8)});
    const auto small = DiffusionSchedule::linear(200, 1e-4, 0.02);
    for (auto& [name, op] : probe_operators(rng)) {
      if (name.rfind("downsample", 0) == 0) continue;
      const Vector x = rng.normal_vector(12);
      InverseProblem p{op, Codec::identity(12), make_measurement(op, x, 0.01, seed), x};
      double worst_m = 0.0, worst_g = 0.0;
      for (int i = 0; i < 50; ++i) {
        const int t = 1 + static_cast<int>(rng.uniform() * 199);
        const Vector z = rng.normal_vector(12);
        worst_m = std::max(worst_m, rel_err(measurement_gradient(z, t, p, model, small, GradientMode::kAnalytic),
                                            measurement_gradient(z, t, p, model, small, GradientMode::kFiniteDifference)));
        worst_g = std::max(worst_g, rel_err(gluing_gradient(z, t, p, model, small, GradientMode::kAnalytic),
                                            gluing_gradient(z, t, p, model, small, GradientMode::kFiniteDifference)));
      }
      out.push_back(check("measurement gradient " + name, worst_m, 1e-4));
      out.push_back(check("gluing gradient " + name, worst_g, 1e-4));
    }
  }

  {
    bool ok = true;
    for (int i = 0; i < 10000 && ok; ++i) {
      const int n = 2 + static_cast<int>(rng.uniform() * 63);
      std::vector<double> w(static_cast<std::size_t>(n));
      for (double& v : w) v = -std::log(1.0 - rng.uniform());
      normalize_weights(std::span<double>(w));
      const double nd = degeneracy(w);
      ok = nd >= 1.0 && nd <= n;
    }
    out.push_back({"degeneracy bounds", ok, ok ? "10000 simplex draws" : "bound violated"});
  }

  {
    const std::vector<double> w{0.5, 0.3, 0.2};
    std::vector<int> counts(3, 0);
    const int trials = 100000;
    for (int i = 0; i < trials; ++i) counts[multinomial_indices(w, 1, rng).front()]++;
    double worst_sigma = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double sd = std::sqrt(trials * w[static_cast<std::size_t>(k)] * (1 - w[static_cast<std::size_t>(k)]));
      worst_sigma = std::max(worst_sigma, std::abs(counts[static_cast<std::size_t>(k)] - trials * w[static_cast<std::size_t>(k)]) / sd);
    }
    out.push_back(check("multinomial selection frequency (sigmas)", worst_sigma, 3.0));
  }

  {
    const GaussianPrior prior{(Vector(2) << 0.3, -0.2).finished(), (Vector(2) << 1.0, 0.5).finished()};
    const auto op = LinearOperator::blur({1, 2}, {0.25, 0.5, 0.25});
    const Measurement m = make_measurement(op, (Vector(2) << 0.5, 1.0).finished(), 0.5, seed);
    const auto exact = linear_gaussian_posterior(prior, op, m);
    const auto grid = grid_posterior(GmmPrior::from_gaussian(prior), op, m, prior_box(GmmPrior::from_gaussian(prior), 6.0), 401);
    out.push_back(check("conjugate vs grid posterior mean", (exact.mean - grid.mean).cwiseAbs().maxCoeff(), 1e-3));
  }

  {
    const bool ok = expected_particle_steps(1000, 10, 20) == 1280;
    out.push_back({"particle-step accounting", ok, "N0=10 R=20 T=1000"});
  }
  return out;
}

}  // namespace pfld::harness
