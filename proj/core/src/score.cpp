#include "pfld/score.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace pfld {

namespace {

void check_input(const Vector& z, int dim, const char* who) {
  if (z.size() != dim)
    throw InvalidArgument(std::string(who) + ": dimension mismatch (" + std::to_string(z.size()) + " vs " +
                          std::to_string(dim) + ")");
  if (!z.allFinite()) throw InvalidArgument(std::string(who) + ": non-finite input");
}

// Per-component diffused log density and score, evaluated together.
struct ComponentTerms {
  double log_weighted;  // log w_k + log N_k(z)
  Vector score;
};

ComponentTerms component(const Vector& z, double weight, const Vector& mean, const Vector& var,
                         double alpha_bar) {
  const double signal = std::sqrt(alpha_bar);
  const Vector cov = (alpha_bar * var.array() + (1.0 - alpha_bar)).matrix();
  const Vector diff = z - signal * mean;
  const Vector scaled = (diff.array() / cov.array()).matrix();
  const double quad = diff.dot(scaled);
  const double log_det = cov.array().log().sum();
  const double log_norm = -0.5 * (quad + log_det + static_cast<double>(z.size()) * std::log(2.0 * std::numbers::pi));
  return {std::log(weight) + log_norm, -scaled};
}

}  // namespace

void GaussianPrior::validate() const {
  require(mean.size() >= 1, "gaussian prior: empty mean");
  require(variance.size() == mean.size(), "gaussian prior: variance/mean dimension mismatch");
  require(mean.allFinite(), "gaussian prior: non-finite mean");
  require(variance.allFinite() && (variance.array() > 0.0).all(),
          "gaussian prior: covariance must be strictly positive");
}

void GmmPrior::validate() const {
  require(!weights.empty(), "gmm prior: no components");
  require(means.size() == weights.size() && variances.size() == weights.size(),
          "gmm prior: weights/means/variances length mismatch");
  const auto d = means.front().size();
  require(d >= 1, "gmm prior: empty component mean");
  double total = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    require(std::isfinite(weights[k]) && weights[k] > 0.0, "gmm prior: weights must be positive");
    require(means[k].size() == d && variances[k].size() == d, "gmm prior: component dimension mismatch");
    require(means[k].allFinite(), "gmm prior: non-finite mean");
    require(variances[k].allFinite() && (variances[k].array() > 0.0).all(),
            "prior variances must be strictly positive");
    total += weights[k];
  }
  require(std::abs(total - 1.0) < 1e-9, "gmm prior: weights must sum to 1");
}

GmmPrior GmmPrior::from_gaussian(const GaussianPrior& g) {
  return GmmPrior{{1.0}, {g.mean}, {g.variance}};
}

double diffused_log_density(const GmmPrior& prior, const Vector& z, double alpha_bar) {
  check_input(z, prior.dim(), "diffused_log_density");
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(prior.weights.size());
  for (std::size_t k = 0; k < logs.size(); ++k) {
    logs[k] = component(z, prior.weights[k], prior.means[k], prior.variances[k], alpha_bar).log_weighted;
    max_log = std::max(max_log, logs[k]);
  }
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - max_log);
  return max_log + std::log(acc);
}

Vector gaussian_score(const Vector& z, int t, const GaussianPrior& prior, const DiffusionSchedule& s) {
  prior.validate();
  check_input(z, static_cast<int>(prior.mean.size()), "gaussian_score");
  const double ab = s.alpha_bar(t);
  const Vector cov = (ab * prior.variance.array() + (1.0 - ab)).matrix();
  return (-(z - std::sqrt(ab) * prior.mean).array() / cov.array()).matrix();
}

Vector gmm_score(const Vector& z, int t, const GmmPrior& prior, const DiffusionSchedule& s) {
  check_input(z, prior.dim(), "gmm_score");
  const double ab = s.alpha_bar(t);
  const auto K = prior.weights.size();
  std::vector<ComponentTerms> terms;
  terms.reserve(K);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < K; ++k) {
    terms.push_back(component(z, prior.weights[k], prior.means[k], prior.variances[k], ab));
    max_log = std::max(max_log, terms.back().log_weighted);
  }
  double norm = 0.0;
  Vector out = Vector::Zero(z.size());
  for (const auto& term : terms) {
    const double r = std::exp(term.log_weighted - max_log);
    norm += r;
    out += r * term.score;
  }
  out /= norm;
  if (!out.allFinite()) throw NumericalError("gmm_score: non-finite score");
  return out;
}

GaussianScoreModel::GaussianScoreModel(GaussianPrior prior) : prior_(std::move(prior)) { prior_.validate(); }

Vector GaussianScoreModel::score(const Vector& z, int t, const DiffusionSchedule& s) const {
  return gaussian_score(z, t, prior_, s);
}

std::optional<Vector> GaussianScoreModel::jacobian_vp(const Vector& z, int t, const DiffusionSchedule& s,
                                                      const Vector& v) const {
  check_input(z, dim(), "GaussianScoreModel::jacobian_vp");
  check_input(v, dim(), "GaussianScoreModel::jacobian_vp");
  const double ab = s.alpha_bar(t);
  const Vector cov = (ab * prior_.variance.array() + (1.0 - ab)).matrix();
  return Vector((-v.array() / cov.array()).matrix());
}

GmmScoreModel::GmmScoreModel(GmmPrior prior) : prior_(std::move(prior)) { prior_.validate(); }

Vector GmmScoreModel::score(const Vector& z, int t, const DiffusionSchedule& s) const {
  return gmm_score(z, t, prior_, s);
}

double jacobian_fd_step(const Vector& z) {
  return 1e-4 * std::max(1.0, z.cwiseAbs().maxCoeff());
}

Vector score_jacobian_vp(const ScoreModel& model, const Vector& z, int t, const DiffusionSchedule& s,
                         const Vector& v) {
  if (auto exact = model.jacobian_vp(z, t, s, v)) return *exact;
  check_input(v, model.dim(), "score_jacobian_vp");
  const double vnorm = v.norm();
  if (vnorm == 0.0) return Vector::Zero(z.size());
  const double h = jacobian_fd_step(z);
  const Vector dir = v / vnorm;
  if (((z + h * dir) - z).norm() == 0.0) throw NumericalError("score_jacobian_vp: step size underflow");
  const Vector forward = model.score(z + h * dir, t, s);
  const Vector backward = model.score(z - h * dir, t, s);
  return (forward - backward) * (vnorm / (2.0 * h));
}

std::unique_ptr<ScoreModel> make_score_model(const GmmPrior& prior) {
  prior.validate();
  if (prior.components() == 1) {
    return std::make_unique<GaussianScoreModel>(GaussianPrior{prior.means.front(), prior.variances.front()});
  }
  return std::make_unique<GmmScoreModel>(prior);
}

}  // namespace pfld
