#pragma once

#include <vector>

#include "pfld/common.hpp"
#include "pfld/operators.hpp"
#include "pfld/score.hpp"

namespace pfld {

struct GaussianPosterior {
  Vector mean;
  Matrix covariance;

  Vector stddev() const { return covariance.diagonal().cwiseSqrt(); }
};

/// Conjugate posterior of a latent with prior N(mu0, diag(var0)) observed
/// through y = A D z + nu, nu ~ N(0, sigma^2 I):
///   Sigma_p = (Sigma0^-1 + (AD)^T (AD) / sigma^2)^-1
///   mu_p    = Sigma_p (Sigma0^-1 mu0 + (AD)^T y / sigma^2)
/// Dense; latent dimensions up to 64.
GaussianPosterior linear_gaussian_posterior(const GaussianPrior& prior, const LinearOperator& op,
                                            const Codec& codec, const Measurement& m);
GaussianPosterior linear_gaussian_posterior(const GaussianPrior& prior, const LinearOperator& op,
                                            const Measurement& m);

struct GridBox {
  Vector lower;
  Vector upper;
};

struct GridPosterior {
  Vector mean;
  // Grid coordinates per axis, endpoints included.
  std::vector<std::vector<double>> axes;
  // Normalised mass, row-major with axis 0 slowest.
  std::vector<double> mass;
  double boundary_mass = 0.0;

  /// Total mass of grid points satisfying pred(point).
  template <class Pred>
  double mass_where(Pred&& pred) const;
  Vector point(std::size_t flat) const;
};

/// Brute-force Bayes on a regular grid over a 1D or 2D latent box, in log
/// space. Throws if more than 1e-6 of the posterior mass sits on the boundary
/// points.
GridPosterior grid_posterior(const GmmPrior& prior, const LinearOperator& op, const Codec& codec,
                             const Measurement& m, const GridBox& box, int resolution);
GridPosterior grid_posterior(const GmmPrior& prior, const LinearOperator& op, const Measurement& m,
                             const GridBox& box, int resolution);

/// Axis-aligned box of +-`width` prior standard deviations around every component.
GridBox prior_box(const GmmPrior& prior, double width);

template <class Pred>
double GridPosterior::mass_where(Pred&& pred) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (pred(point(i))) acc += mass[i];
  return acc;
}

}  // namespace pfld
