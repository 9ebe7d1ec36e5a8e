#pragma once

#include <vector>

#include "pfld/common.hpp"

namespace pfld {

// Which per-step standard deviation the ancestral update injects.
enum class AncestralVariance {
  kPosterior,  // beta_t (1 - abar_{t-1}) / (1 - abar_t)
  kBeta,       // beta_t
};

struct MarginalCoeffs {
  double signal_scale;  // sqrt(abar_t)
  double noise_scale;   // sqrt(1 - abar_t)
};

/// Discrete variance-preserving diffusion schedule.
///
/// Transitions are indexed t = 1..T and states t = 0..T, so beta/alpha/
/// sigma_tilde are only defined for t >= 1 while alpha_bar(0) == 1. The
/// object is immutable after construction.
class DiffusionSchedule {
 public:
  /// Linear beta ramp from beta_min (t = 1) to beta_max (t = T).
  static DiffusionSchedule linear(int steps, double beta_min, double beta_max,
                                  AncestralVariance variance = AncestralVariance::kPosterior);

  /// Arbitrary per-transition rates, betas[0] belongs to t = 1.
  static DiffusionSchedule from_betas(std::vector<double> betas,
                                      AncestralVariance variance = AncestralVariance::kPosterior);

  int steps() const { return steps_; }
  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;
  double sigma_tilde(int t) const;
  AncestralVariance variance() const { return variance_; }

  MarginalCoeffs marginal(int t) const;

 private:
  DiffusionSchedule() = default;
  void check_transition(int t) const;

  int steps_ = 0;
  AncestralVariance variance_ = AncestralVariance::kPosterior;
  // All arrays have T + 1 entries; index 0 of beta/alpha/sigma is unused.
  std::vector<double> beta_;
  std::vector<double> alpha_;
  std::vector<double> alpha_bar_;
  std::vector<double> sigma_tilde_;
};

// Free-function spellings used by the harness.
inline DiffusionSchedule build_linear_schedule(int steps, double beta_min, double beta_max) {
  return DiffusionSchedule::linear(steps, beta_min, beta_max);
}
inline MarginalCoeffs marginal_coeffs(const DiffusionSchedule& s, int t) { return s.marginal(t); }

}  // namespace pfld
