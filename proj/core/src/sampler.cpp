#include "pfld/sampler.hpp"

#include <cmath>
#include <string>

namespace pfld {

namespace {

double signal_level(int t, const DiffusionSchedule& s) {
  const double ab = s.alpha_bar(t);
  if (!(ab > 0.0)) throw NumericalError("tweedie: alpha_bar is zero at t = " + std::to_string(t));
  return ab;
}

// d f / d z_hat0 for the measurement objective.
Vector measurement_outer(const Vector& z_hat0, const InverseProblem& p) {
  const Vector r = p.op.apply(p.codec.decode(z_hat0)) - p.measurement.y;
  return 2.0 * p.codec.decode_adjoint(p.op.adjoint(r));
}

Vector glue_anchor(const InverseProblem& p, GlueReference reference) {
  if (reference == GlueReference::kTrueSignal) {
    if (!p.true_signal) throw InvalidArgument("gluing: true-signal reference requested but x* is unknown");
    return p.op.normal(*p.true_signal);
  }
  return p.op.adjoint(p.measurement.y);
}

// z_hat0 - E(P + (I - A^T A) D(z_hat0)).
Vector glue_residual(const Vector& z_hat0, const InverseProblem& p, const Vector& anchor) {
  const Vector decoded = p.codec.decode(z_hat0);
  const Vector composite = anchor + decoded - p.op.normal(decoded);
  return z_hat0 - p.codec.encode(composite);
}

Vector glue_outer(const Vector& z_hat0, const InverseProblem& p, const Vector& anchor) {
  const Vector g = glue_residual(z_hat0, p, anchor);
  const Vector q = p.codec.encode_adjoint(g);
  return 2.0 * (g - p.codec.decode_adjoint(q - p.op.normal(q)));
}

template <class Objective>
Vector central_difference(const Vector& z, Objective&& f) {
  const double h = jacobian_fd_step(z);
  Vector grad(z.size());
  Vector probe = z;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    probe[i] = z[i] + h;
    const double up = f(probe);
    probe[i] = z[i] - h;
    const double down = f(probe);
    probe[i] = z[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

void require_jacobian(const ScoreModel& model, GradientMode mode) {
  if (mode == GradientMode::kAnalytic && !model.has_analytic_jacobian())
    throw InvalidArgument("analytic gradient mode needs a score model with a closed-form Jacobian");
}

}  // namespace

double StepSize::at(int t) const {
  if (per_step.empty()) return constant;
  if (t < 0 || static_cast<std::size_t>(t) >= per_step.size())
    throw InvalidArgument("step size schedule has no entry for t = " + std::to_string(t));
  return per_step[static_cast<std::size_t>(t)];
}

void PsldConfig::validate(int steps) const {
  for (const auto* size : {&eta, &gamma}) {
    require(std::isfinite(size->constant) && size->constant >= 0.0, "psld: step sizes must be finite and >= 0");
    if (!size->per_step.empty()) {
      require(size->per_step.size() == static_cast<std::size_t>(steps) + 1,
              "psld: per-step schedule needs T + 1 entries");
      for (double v : size->per_step) require(std::isfinite(v) && v >= 0.0, "psld: step sizes must be >= 0");
    }
  }
}

void InverseProblem::validate() const {
  require(codec.pixel_dim() == op.in_dim(), "problem: codec pixel dimension does not match the operator input");
  require(measurement.y.size() == op.out_dim(), "problem: measurement dimension does not match the operator output");
  require(measurement.y.allFinite(), "problem: measurement has non-finite entries");
  require(measurement.sigma_nu >= 0.0, "problem: sigma_nu must be >= 0");
  if (true_signal) require(true_signal->size() == op.in_dim(), "problem: x* dimension mismatch");
}

Vector tweedie_estimate(const Vector& z, int t, const ScoreModel& model, const DiffusionSchedule& s) {
  const double ab = signal_level(t, s);
  return (z + (1.0 - ab) * model.score(z, t, s)) / std::sqrt(ab);
}

Vector tweedie_jacobian_vp(const Vector& z, int t, const ScoreModel& model, const DiffusionSchedule& s,
                           const Vector& v) {
  const double ab = signal_level(t, s);
  return (v + (1.0 - ab) * score_jacobian_vp(model, z, t, s, v)) / std::sqrt(ab);
}

AncestralCoeffs ancestral_coeffs(int t, const DiffusionSchedule& s) {
  const double ab = s.alpha_bar(t);
  const double ab_prev = s.alpha_bar(t - 1);
  const double denom = 1.0 - ab;
  if (!(denom > 0.0)) throw NumericalError("ancestral_update: 1 - alpha_bar is zero at t = " + std::to_string(t));
  return {std::sqrt(s.alpha(t)) * (1.0 - ab_prev) / denom, std::sqrt(ab_prev) * s.beta(t) / denom,
          s.sigma_tilde(t)};
}

Vector ancestral_update(const Vector& z, const Vector& z_hat0, int t, const DiffusionSchedule& s, Rng* rng) {
  require(z.size() == z_hat0.size(), "ancestral_update: dimension mismatch");
  const auto c = ancestral_coeffs(t, s);
  Vector out = c.state * z + c.estimate * z_hat0;
  if (rng != nullptr && c.noise > 0.0) out += c.noise * rng->normal_vector(z.size());
  return out;
}

double measurement_objective(const Vector& z, int t, const InverseProblem& problem, const ScoreModel& model,
                             const DiffusionSchedule& s) {
  return residual_norm_sq(problem.measurement, problem.op, problem.codec, tweedie_estimate(z, t, model, s));
}

double gluing_objective(const Vector& z, int t, const InverseProblem& problem, const ScoreModel& model,
                        const DiffusionSchedule& s, GlueReference reference) {
  const Vector anchor = glue_anchor(problem, reference);
  return glue_residual(tweedie_estimate(z, t, model, s), problem, anchor).squaredNorm();
}

Vector measurement_gradient(const Vector& z, int t, const InverseProblem& problem, const ScoreModel& model,
                            const DiffusionSchedule& s, GradientMode mode) {
  if (mode == GradientMode::kFiniteDifference) {
    return central_difference(z, [&](const Vector& probe) { return measurement_objective(probe, t, problem, model, s); });
  }
  require_jacobian(model, mode);
  const Vector z_hat0 = tweedie_estimate(z, t, model, s);
  return tweedie_jacobian_vp(z, t, model, s, measurement_outer(z_hat0, problem));
}

Vector gluing_gradient(const Vector& z, int t, const InverseProblem& problem, const ScoreModel& model,
                       const DiffusionSchedule& s, GradientMode mode, GlueReference reference) {
  if (mode == GradientMode::kFiniteDifference) {
    return central_difference(
        z, [&](const Vector& probe) { return gluing_objective(probe, t, problem, model, s, reference); });
  }
  require_jacobian(model, mode);
  const Vector anchor = glue_anchor(problem, reference);
  const Vector z_hat0 = tweedie_estimate(z, t, model, s);
  return tweedie_jacobian_vp(z, t, model, s, glue_outer(z_hat0, problem, anchor));
}

StepOutput psld_step(const Vector& z, int t, const InverseProblem& problem, const ScoreModel& model,
                     const DiffusionSchedule& s, const PsldConfig& cfg, Rng& rng) {
  require(z.size() == problem.latent_dim(), "psld_step: state dimension does not match the codec latent space");
  StepOutput out;
  out.z_hat0 = tweedie_estimate(z, t, model, s);
  out.residual_sq = residual_norm_sq(problem.measurement, problem.op, problem.codec, out.z_hat0);
  out.z_next = ancestral_update(z, out.z_hat0, t, s, cfg.stochastic ? &rng : nullptr);

  const double eta = cfg.eta.at(t);
  if (eta != 0.0) out.z_next -= eta * measurement_gradient(z, t, problem, model, s, cfg.gradient_mode);
  const double gamma = cfg.gamma.at(t);
  if (cfg.glue_enabled && gamma != 0.0)
    out.z_next -= gamma * gluing_gradient(z, t, problem, model, s, cfg.gradient_mode, cfg.glue_reference);

  if (!out.z_next.allFinite() || !out.z_hat0.allFinite())
    throw NumericalError("psld_step: non-finite state at t = " + std::to_string(t));
  return out;
}

}  // namespace pfld
