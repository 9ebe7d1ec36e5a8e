#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "pfld/common.hpp"
#include "pfld/schedule.hpp"

namespace pfld {

struct GaussianPrior {
  Vector mean;
  Vector variance;  // diagonal, strictly positive

  void validate() const;
};

/// Diagonal-covariance Gaussian mixture over the latent space.
struct GmmPrior {
  std::vector<double> weights;
  std::vector<Vector> means;
  std::vector<Vector> variances;

  void validate() const;
  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  int components() const { return static_cast<int>(weights.size()); }

  static GmmPrior from_gaussian(const GaussianPrior& g);
};

/// log p_t(z) for the mixture pushed through the VP forward process with
/// cumulative signal level alpha_bar: each component becomes
/// N(sqrt(abar) mu_k, abar Sigma_k + (1 - abar) I).
double diffused_log_density(const GmmPrior& prior, const Vector& z, double alpha_bar);

// grad_z log N(z; sqrt(abar) mu0, abar Sigma0 + (1 - abar) I).
Vector gaussian_score(const Vector& z, int t, const GaussianPrior& prior, const DiffusionSchedule& s);
// Responsibility-weighted component scores, log-sum-exp stabilised.
Vector gmm_score(const Vector& z, int t, const GmmPrior& prior, const DiffusionSchedule& s);

/// Score model s(z, t) = grad log p_t(z). Implementations are immutable and
/// safe to evaluate concurrently.
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;

  virtual int dim() const = 0;
  virtual Vector score(const Vector& z, int t, const DiffusionSchedule& s) const = 0;
  /// (d score / dz) v when available in closed form.
  virtual std::optional<Vector> jacobian_vp(const Vector& z, int t, const DiffusionSchedule& s,
                                            const Vector& v) const = 0;
  virtual bool has_analytic_jacobian() const = 0;
  /// The clean-data prior as a mixture, for oracles and reports.
  virtual GmmPrior prior_descriptor() const = 0;
};

class GaussianScoreModel final : public ScoreModel {
 public:
  explicit GaussianScoreModel(GaussianPrior prior);

  int dim() const override { return static_cast<int>(prior_.mean.size()); }
  Vector score(const Vector& z, int t, const DiffusionSchedule& s) const override;
  std::optional<Vector> jacobian_vp(const Vector& z, int t, const DiffusionSchedule& s,
                                    const Vector& v) const override;
  bool has_analytic_jacobian() const override { return true; }
  GmmPrior prior_descriptor() const override { return GmmPrior::from_gaussian(prior_); }
  const GaussianPrior& prior() const { return prior_; }

 private:
  GaussianPrior prior_;
};

class GmmScoreModel final : public ScoreModel {
 public:
  explicit GmmScoreModel(GmmPrior prior);

  int dim() const override { return prior_.dim(); }
  Vector score(const Vector& z, int t, const DiffusionSchedule& s) const override;
  std::optional<Vector> jacobian_vp(const Vector&, int, const DiffusionSchedule&,
                                    const Vector&) const override {
    return std::nullopt;
  }
  bool has_analytic_jacobian() const override { return false; }
  GmmPrior prior_descriptor() const override { return prior_; }

 private:
  GmmPrior prior_;
};

/// Central-difference step used by the Jacobian fallback.
double jacobian_fd_step(const Vector& z);

/// (d score / dz) v: analytic when the model provides it, otherwise a
/// directional central difference with h = 1e-4 * max(1, |z|_inf).
Vector score_jacobian_vp(const ScoreModel& model, const Vector& z, int t, const DiffusionSchedule& s,
                         const Vector& v);

std::unique_ptr<ScoreModel> make_score_model(const GmmPrior& prior);

}  // namespace pfld
