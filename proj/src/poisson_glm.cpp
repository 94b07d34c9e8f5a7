#include "bootbayes/poisson_glm.hpp"

#include "bootbayes/numerics.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace bootbayes {

Matrix poly_basis(const Vector& x, int degree) {
  if (degree < 0) throw ValidationError("poly_basis: negative degree");
  if (x.size() <= degree) throw ValidationError("poly_basis: need more points than the degree");
  const double center = x.mean();
  const double scale = std::sqrt((x.array() - center).square().mean());
  const Vector u = (x.array() - center) / (scale > 0.0 ? scale : 1.0);
  Matrix vander(x.size(), degree + 1);
  vander.col(0).setOnes();
  for (int k = 1; k <= degree; ++k) vander.col(k) = vander.col(k - 1).cwiseProduct(u);
  Eigen::HouseholderQR<Matrix> qr(vander);
  Matrix q = qr.householderQ() * Matrix::Identity(x.size(), degree + 1);
  // Orient each column so its projection onto the raw monomial is positive.
  const Matrix r = q.transpose() * vander;
  for (int k = 0; k <= degree; ++k) {
    if (r(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  return q;
}

double poisson_deviance(const Vector& y, const Vector& mu) {
  double dev = 0.0;
  for (Index j = 0; j < y.size(); ++j) {
    const double term = y(j) > 0.0 ? y(j) * std::log(y(j) / mu(j)) : 0.0;
    dev += term - (y(j) - mu(j));
  }
  return 2.0 * dev;
}

GlmFit glm_fit(const Matrix& x, const Vector& y) {
  if (x.rows() != y.size()) throw ValidationError("glm_fit: design rows and counts differ");
  if ((y.array() < 0.0).any()) throw ValidationError("glm_fit: counts must be nonnegative");
  if (!(y.array() > 0.0).any()) throw ValidationError("glm_fit: need at least one positive count");
  Eigen::ColPivHouseholderQR<Matrix> rank_check(x);
  if (rank_check.rank() < x.cols()) throw ValidationError("glm_fit: design matrix is rank deficient");

  GlmFit fit;
  fit.mu = (y.array() + 0.1).matrix();
  fit.eta = fit.mu.array().log();
  double dev_old = poisson_deviance(y, fit.mu);
  constexpr int kMaxIterations = 50;
  for (int it = 1; it <= kMaxIterations; ++it) {
    const Vector z = fit.eta.array() + (y - fit.mu).array() / fit.mu.array();
    const Matrix xtw = x.transpose() * fit.mu.asDiagonal();
    fit.alpha = (xtw * x).ldlt().solve(xtw * z);
    fit.eta = x * fit.alpha;
    fit.mu = fit.eta.array().exp();
    fit.deviance = poisson_deviance(y, fit.mu);
    fit.iterations = it;
    if (!std::isfinite(fit.deviance)) break;
    if (std::abs(fit.deviance - dev_old) / (std::abs(fit.deviance) + 0.1) < 1e-10) return fit;
    dev_old = fit.deviance;
  }
  std::ostringstream msg;
  msg << "glm_fit: IRLS did not converge after " << fit.iterations
      << " iterations (last deviance " << fit.deviance << ")";
  throw NumericalError(msg.str());
}

Vector glm_sample(const Vector& mu_hat, Rng& rng) {
  Vector y(mu_hat.size());
  for (Index j = 0; j < y.size(); ++j) {
    std::poisson_distribution<long> poisson(mu_hat(j));
    y(j) = static_cast<double>(poisson(rng));
  }
  return y;
}

double statistic_fdr(const Vector& mu, double z, const Vector& bin_centers) {
  if (mu.size() != bin_centers.size()) throw ValidationError("statistic_fdr: length mismatch");
  double below = 0.0;
  for (Index j = 0; j < mu.size(); ++j) {
    if (std::abs(bin_centers(j) - z) <= 1e-9) {
      below += 0.5 * mu(j);
    } else if (bin_centers(j) < z) {
      below += mu(j);
    }
  }
  const double upper = 1.0 - below / mu.sum();
  if (!(upper > 0.0)) throw DomainError("statistic_fdr: 1 - F(z) is not positive");
  return (1.0 - normal_cdf(z)) / upper;
}

PoissonGlmFamily::PoissonGlmFamily(Matrix x) : x_(std::move(x)) {
  Eigen::ColPivHouseholderQR<Matrix> qr(x_);
  if (qr.rank() < x_.cols()) throw ValidationError("PoissonGlmFamily: design is rank deficient");
}

std::string PoissonGlmFamily::id() const {
  return "poisson_glm(J=" + std::to_string(x_.rows()) + ",p=" + std::to_string(x_.cols()) + ")";
}

bool PoissonGlmFamily::in_space(const ExpectationPoint& beta) const {
  if (beta.beta.size() != x_.cols() || !beta.beta.allFinite()) return false;
  try {
    canonical(beta);
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

double PoissonGlmFamily::psi(const CanonicalPoint& alpha) const { return mu(alpha).sum(); }

ExpectationPoint PoissonGlmFamily::mean(const CanonicalPoint& alpha) const {
  return {x_.transpose() * mu(alpha)};
}

CanonicalPoint PoissonGlmFamily::canonical(const ExpectationPoint& beta) const {
  if (beta.beta.size() != x_.cols() || !beta.beta.allFinite()) {
    throw DomainError("poisson_glm: beta has wrong dimension or is not finite");
  }
  // Start from the least-squares image of the implied counts.
  const Vector guess = x_ * (x_.transpose() * x_).ldlt().solve(beta.beta);
  Vector alpha = (x_.transpose() * x_).ldlt().solve(
      x_.transpose() * guess.cwiseMax(0.5).array().log().matrix());
  auto objective = [&](const Vector& a) { return (x_ * a).array().exp().sum() - a.dot(beta.beta); };
  double value = objective(alpha);
  const double scale = 1.0 + beta.beta.cwiseAbs().maxCoeff();
  for (int it = 0; it < 200; ++it) {
    const Vector m = (x_ * alpha).array().exp();
    const Vector grad = x_.transpose() * m - beta.beta;
    if (grad.cwiseAbs().maxCoeff() <= 1e-11 * scale) return {alpha};
    const Matrix hess = x_.transpose() * m.asDiagonal() * x_;
    const Vector step = hess.ldlt().solve(grad);
    double t = 1.0;
    Vector next = alpha - step;
    double next_value = objective(next);
    // near the root the objective is flat to rounding; a smaller gradient is progress enough
    auto grad_max = [&](const Vector& a) {
      return (x_.transpose() * (x_ * a).array().exp().matrix() - beta.beta).cwiseAbs().maxCoeff();
    };
    if (grad_max(next) < grad.cwiseAbs().maxCoeff()) {
      alpha = next;
      value = next_value;
      continue;
    }
    while (!(next_value <= value + 1e-4 * t * -grad.dot(step)) && t > 1e-12) {
      t *= 0.5;
      next = alpha - t * step;
      next_value = objective(next);
    }
    if (!(next_value <= value) && t <= 1e-12) break;
    alpha = next;
    value = next_value;
  }
  const Vector m = (x_ * alpha).array().exp();
  if ((x_.transpose() * m - beta.beta).cwiseAbs().maxCoeff() <= 1e-8 * scale) return {alpha};
  throw DomainError("poisson_glm: beta is outside the expectation space (no finite MLE)");
}

Matrix PoissonGlmFamily::covariance(const CanonicalPoint& alpha) const {
  return x_.transpose() * mu(alpha).asDiagonal() * x_;
}

std::optional<double> PoissonGlmFamily::third_cumulant(const CanonicalPoint& alpha,
                                                       const Vector& v) const {
  const Vector xv = x_ * v;
  return mu(alpha).dot(xv.array().cube().matrix());
}

double PoissonGlmFamily::delta(const ExpectationPoint& beta, const MlePoint& mle) const {
  const CanonicalPoint alpha = canonical(beta);
  return glm_delta(eta(alpha), eta(mle.alpha_hat), mu(alpha), mu(mle.alpha_hat));
}

Replicate PoissonGlmFamily::sample(const MlePoint& mle, Rng& rng) const {
  const Vector y = glm_sample(mu(mle.alpha_hat), rng);
  return replicate_at({x_.transpose() * y});
}

Vector PoissonGlmFamily::sample_data(const ExpectationPoint& beta, Rng& rng) const {
  return glm_sample(mu(canonical(beta)), rng);
}

}  // namespace bootbayes
