#include "pfld/schedule.hpp"

#include <cmath>
#include <string>

namespace pfld {

DiffusionSchedule DiffusionSchedule::linear(int steps, double beta_min, double beta_max,
                                            AncestralVariance variance) {
  require(steps >= 1, "schedule: T must be >= 1");
  require(std::isfinite(beta_min) && std::isfinite(beta_max), "schedule: beta bounds must be finite");
  require(beta_min > 0.0 && beta_max < 1.0, "schedule: beta bounds must lie in (0, 1)");
  require(beta_min <= beta_max, "schedule: beta_min must not exceed beta_max");

  std::vector<double> betas(static_cast<std::size_t>(steps));
  for (int i = 0; i < steps; ++i) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    betas[static_cast<std::size_t>(i)] = beta_min + frac * (beta_max - beta_min);
  }
  return from_betas(std::move(betas), variance);
}

DiffusionSchedule DiffusionSchedule::from_betas(std::vector<double> betas, AncestralVariance variance) {
  require(!betas.empty(), "schedule: need at least one beta");
  DiffusionSchedule s;
  s.steps_ = static_cast<int>(betas.size());
  s.variance_ = variance;
  const auto n = betas.size() + 1;
  s.beta_.assign(n, 0.0);
  s.alpha_.assign(n, 1.0);
  s.alpha_bar_.assign(n, 1.0);
  s.sigma_tilde_.assign(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) {
    const double b = betas[t - 1];
    require(std::isfinite(b) && b > 0.0 && b < 1.0,
            "schedule: beta[" + std::to_string(t) + "] outside (0, 1)");
    s.beta_[t] = b;
    s.alpha_[t] = 1.0 - b;
    s.alpha_bar_[t] = s.alpha_bar_[t - 1] * s.alpha_[t];
    const double var = variance == AncestralVariance::kBeta
                           ? b
                           : b * (1.0 - s.alpha_bar_[t - 1]) / (1.0 - s.alpha_bar_[t]);
    s.sigma_tilde_[t] = std::sqrt(var);
  }
  return s;
}

void DiffusionSchedule::check_transition(int t) const {
  if (t < 1 || t > steps_) {
    throw InvalidArgument("schedule: transition index " + std::to_string(t) + " outside [1, " +
                          std::to_string(steps_) + "]");
  }
}

double DiffusionSchedule::beta(int t) const {
  check_transition(t);
  return beta_[static_cast<std::size_t>(t)];
}

double DiffusionSchedule::alpha(int t) const {
  check_transition(t);
  return alpha_[static_cast<std::size_t>(t)];
}

double DiffusionSchedule::sigma_tilde(int t) const {
  check_transition(t);
  return sigma_tilde_[static_cast<std::size_t>(t)];
}

double DiffusionSchedule::alpha_bar(int t) const {
  if (t < 0 || t > steps_) {
    throw InvalidArgument("schedule: state index " + std::to_string(t) + " outside [0, " +
                          std::to_string(steps_) + "]");
  }
  return alpha_bar_[static_cast<std::size_t>(t)];
}

MarginalCoeffs DiffusionSchedule::marginal(int t) const {
  const double ab = alpha_bar(t);
  return {std::sqrt(ab), std::sqrt(1.0 - ab)};
}

}  // namespace pfld
