#include "pfld/oracle.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

namespace pfld {

namespace {

constexpr int kMaxDenseDim = 64;

// Dense A D, latent -> measurement.
Matrix forward_matrix(const LinearOperator& op, const Codec& codec) {
  require(codec.pixel_dim() == op.in_dim(), "oracle: codec/operator dimension mismatch");
  const int k = codec.latent_dim();
  Matrix h(op.out_dim(), k);
  for (int j = 0; j < k; ++j) h.col(j) = op.apply(codec.decode(Vector::Unit(k, j)));
  return h;
}

}  // namespace

GaussianPosterior linear_gaussian_posterior(const GaussianPrior& prior, const LinearOperator& op,
                                            const Codec& codec, const Measurement& m) {
  prior.validate();
  require(std::isfinite(m.sigma_nu) && m.sigma_nu > 0.0, "linear_gaussian_posterior: sigma_nu must be positive");
  require(prior.mean.size() == codec.latent_dim(), "linear_gaussian_posterior: prior/latent dimension mismatch");
  require(codec.latent_dim() <= kMaxDenseDim, "linear_gaussian_posterior: latent dimension above 64");
  require(m.y.size() == op.out_dim(), "linear_gaussian_posterior: measurement dimension mismatch");

  const Matrix h = forward_matrix(op, codec);
  const double inv_noise = 1.0 / (m.sigma_nu * m.sigma_nu);
  const Vector prior_precision = prior.variance.cwiseInverse();

  Matrix precision = inv_noise * (h.transpose() * h);
  precision.diagonal() += prior_precision;
  Eigen::LLT<Matrix> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("linear_gaussian_posterior: precision is not positive definite");

  GaussianPosterior post;
  post.covariance = llt.solve(Matrix::Identity(precision.rows(), precision.cols()));
  post.covariance = 0.5 * (post.covariance + post.covariance.transpose());
  const Vector rhs = prior_precision.cwiseProduct(prior.mean) + inv_noise * (h.transpose() * m.y);
  post.mean = llt.solve(rhs);
  return post;
}

GaussianPosterior linear_gaussian_posterior(const GaussianPrior& prior, const LinearOperator& op,
                                            const Measurement& m) {
  return linear_gaussian_posterior(prior, op, Codec::identity(op.in_dim()), m);
}

Vector GridPosterior::point(std::size_t flat) const {
  Vector x(static_cast<Eigen::Index>(axes.size()));
  for (std::size_t a = axes.size(); a-- > 0;) {
    const auto n = axes[a].size();
    x[static_cast<Eigen::Index>(a)] = axes[a][flat % n];
    flat /= n;
  }
  return x;
}

GridPosterior grid_posterior(const GmmPrior& prior, const LinearOperator& op, const Codec& codec,
                             const Measurement& m, const GridBox& box, int resolution) {
  prior.validate();
  const int dim = prior.dim();
  require(dim == 1 || dim == 2, "grid_posterior: only 1D and 2D latents are supported");
  require(codec.latent_dim() == dim, "grid_posterior: prior/latent dimension mismatch");
  require(box.lower.size() == dim && box.upper.size() == dim, "grid_posterior: box dimension mismatch");
  require((box.upper.array() > box.lower.array()).all(), "grid_posterior: empty box");
  require(resolution >= 3, "grid_posterior: resolution must be >= 3");
  require(std::isfinite(m.sigma_nu) && m.sigma_nu > 0.0, "grid_posterior: sigma_nu must be positive");

  GridPosterior g;
  g.axes.resize(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a) {
    auto& axis = g.axes[static_cast<std::size_t>(a)];
    axis.resize(static_cast<std::size_t>(resolution));
    const double step = (box.upper[a] - box.lower[a]) / (resolution - 1);
    for (int i = 0; i < resolution; ++i) axis[static_cast<std::size_t>(i)] = box.lower[a] + i * step;
  }

  std::size_t total = 1;
  for (int a = 0; a < dim; ++a) total *= static_cast<std::size_t>(resolution);
  std::vector<double> log_post(total);
  double max_log = -std::numeric_limits<double>::infinity();
  const double inv_two_var = 0.5 / (m.sigma_nu * m.sigma_nu);
  for (std::size_t i = 0; i < total; ++i) {
    const Vector x = g.point(i);
    const double log_prior = diffused_log_density(prior, x, 1.0);
    const double misfit = (m.y - op.apply(codec.decode(x))).squaredNorm();
    log_post[i] = log_prior - inv_two_var * misfit;
    max_log = std::max(max_log, log_post[i]);
  }

  g.mass.resize(total);
  double norm = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    g.mass[i] = std::exp(log_post[i] - max_log);
    norm += g.mass[i];
  }
  g.mean = Vector::Zero(dim);
  for (std::size_t i = 0; i < total; ++i) {
    g.mass[i] /= norm;
    const Vector x = g.point(i);
    g.mean += g.mass[i] * x;
    bool on_edge = false;
    std::size_t rest = i;
    for (int a = dim; a-- > 0;) {
      const auto idx = rest % static_cast<std::size_t>(resolution);
      rest /= static_cast<std::size_t>(resolution);
      on_edge = on_edge || idx == 0 || idx + 1 == static_cast<std::size_t>(resolution);
    }
    if (on_edge) g.boundary_mass += g.mass[i];
  }
  if (g.boundary_mass >= 1e-6)
    throw InvalidArgument("grid_posterior: box too tight, boundary mass " + std::to_string(g.boundary_mass));
  return g;
}

GridPosterior grid_posterior(const GmmPrior& prior, const LinearOperator& op, const Measurement& m,
                             const GridBox& box, int resolution) {
  return grid_posterior(prior, op, Codec::identity(op.in_dim()), m, box, resolution);
}

GridBox prior_box(const GmmPrior& prior, double width) {
  prior.validate();
  GridBox box{prior.means.front(), prior.means.front()};
  for (int k = 0; k < prior.components(); ++k) {
    const auto& mu = prior.means[static_cast<std::size_t>(k)];
    const Vector sd = prior.variances[static_cast<std::size_t>(k)].cwiseSqrt();
    box.lower = box.lower.cwiseMin(mu - width * sd);
    box.upper = box.upper.cwiseMax(mu + width * sd);
  }
  return box;
}

}  // namespace pfld
