#pragma once

#include <optional>
#include <vector>

#include "pfld/common.hpp"
#include "pfld/operators.hpp"
#include "pfld/rng.hpp"
#include "pfld/schedule.hpp"
#include "pfld/score.hpp"

namespace pfld {

/// Constant step size with optional per-step overrides (index t = 1..T).
struct StepSize {
  double constant = 0.0;
  std::vector<double> per_step;  // empty, or T + 1 entries

  double at(int t) const;
};

enum class GradientMode { kAnalytic, kFiniteDifference };

// What stands in for A^T A x* inside the gluing objective.
enum class GlueReference {
  kMeasurement,  // A^T y
  kTrueSignal,   // A^T A x*, synthetic experiments only
};

struct PsldConfig {
  StepSize eta{0.3, {}};
  StepSize gamma{0.03, {}};
  GradientMode gradient_mode = GradientMode::kAnalytic;
  bool glue_enabled = true;
  GlueReference glue_reference = GlueReference::kMeasurement;
  // Forces sigma_tilde to zero; deterministic trajectories for tests.
  bool stochastic = true;

  void validate(int steps) const;
};

/// Everything the guided step needs to know about the inverse problem.
struct InverseProblem {
  LinearOperator op;
  Codec codec;
  Measurement measurement;
  // Pixel-space x*, required only for GlueReference::kTrueSignal.
  std::optional<Vector> true_signal;

  int latent_dim() const { return codec.latent_dim(); }
  void validate() const;
};

struct StepOutput {
  Vector z_hat0;
  Vector z_next;
  double residual_sq = 0.0;
};

// (z + (1 - abar_t) s(z, t)) / sqrt(abar_t).
Vector tweedie_estimate(const Vector& z, int t, const ScoreModel& model, const DiffusionSchedule& s);

/// d z_hat0 / dz applied to v. The Jacobian is symmetric (Hessian of a log
/// density), so this is also the transpose product.
Vector tweedie_jacobian_vp(const Vector& z, int t, const ScoreModel& model, const DiffusionSchedule& s,
                           const Vector& v);

struct AncestralCoeffs {
  double state;     // sqrt(alpha_t) (1 - abar_{t-1}) / (1 - abar_t)
  double estimate;  // sqrt(abar_{t-1}) beta_t / (1 - abar_t)
  double noise;     // sigma_tilde_t
};

AncestralCoeffs ancestral_coeffs(int t, const DiffusionSchedule& s);

/// z' = c_state z + c_estimate z_hat0 + sigma_tilde eps. Pass rng == nullptr
/// to drop the noise term.
Vector ancestral_update(const Vector& z, const Vector& z_hat0, int t, const DiffusionSchedule& s, Rng* rng);

/// grad_z ||y - A(D(z_hat0(z)))||^2.
Vector measurement_gradient(const Vector& z, int t, const InverseProblem& problem, const ScoreModel& model,
                            const DiffusionSchedule& s, GradientMode mode);

/// grad_z ||z_hat0 - E(P + (I - A^T A) D(z_hat0))||^2 with P = A^T y or A^T A x*.
Vector gluing_gradient(const Vector& z, int t, const InverseProblem& problem, const ScoreModel& model,
                       const DiffusionSchedule& s, GradientMode mode,
                       GlueReference reference = GlueReference::kMeasurement);

// Scalar objectives behind the two gradients; exposed for gradient checks.
double measurement_objective(const Vector& z, int t, const InverseProblem& problem, const ScoreModel& model,
                             const DiffusionSchedule& s);
double gluing_objective(const Vector& z, int t, const InverseProblem& problem, const ScoreModel& model,
                        const DiffusionSchedule& s, GlueReference reference = GlueReference::kMeasurement);

/// One guided reverse step from state t to t - 1:
/// z_next = z' - eta_t * grad_meas - gamma_t * grad_glue.
StepOutput psld_step(const Vector& z, int t, const InverseProblem& problem, const ScoreModel& model,
                     const DiffusionSchedule& s, const PsldConfig& cfg, Rng& rng);

}  // namespace pfld
