#include "bootbayes/families.hpp"

#include <cmath>
#include <random>

namespace bootbayes {

namespace {

double scalar(const Vector& v) {
  if (v.size() != 1) throw ValidationError("one-parameter family given a vector of size " +
                                           std::to_string(v.size()));
  return v(0);
}

Vector one(double x) { return Vector::Constant(1, x); }

}  // namespace

// Gamma scale ---------------------------------------------------------------

GammaScaleFamily::GammaScaleFamily(int n) : n_(n) {
  if (n < 1) throw ValidationError("GammaScaleFamily: n must be positive");
}

bool GammaScaleFamily::in_space(const ExpectationPoint& beta) const {
  return beta.beta.size() == 1 && std::isfinite(beta.beta(0)) && beta.beta(0) > 0.0;
}

// alpha = -n / beta, psi(alpha) = -n log(-alpha)
double GammaScaleFamily::psi(const CanonicalPoint& alpha) const {
  const double a = scalar(alpha.alpha);
  if (!(a < 0.0)) throw DomainError("gamma_scale: canonical parameter must be negative");
  return -n_ * std::log(-a);
}

ExpectationPoint GammaScaleFamily::mean(const CanonicalPoint& alpha) const {
  return {one(-n_ / scalar(alpha.alpha))};
}

CanonicalPoint GammaScaleFamily::canonical(const ExpectationPoint& beta) const {
  if (!in_space(beta)) throw DomainError("gamma_scale: beta must be positive");
  return {one(-n_ / beta.beta(0))};
}

Matrix GammaScaleFamily::covariance(const CanonicalPoint& alpha) const {
  const double a = scalar(alpha.alpha);
  return Matrix::Constant(1, 1, n_ / (a * a));
}

std::optional<double> GammaScaleFamily::third_cumulant(const CanonicalPoint& alpha,
                                                       const Vector& v) const {
  const double a = scalar(alpha.alpha);
  const double x = scalar(v);
  return -2.0 * n_ / (a * a * a) * x * x * x;
}

Replicate GammaScaleFamily::sample(const MlePoint& mle, Rng& rng) const {
  std::gamma_distribution<double> gamma(n_, 1.0);
  const double b = mle.beta_hat.beta(0) * gamma(rng) / n_;
  return replicate_at({one(b)});
}

Vector GammaScaleFamily::sample_data(const ExpectationPoint& beta, Rng& rng) const {
  std::exponential_distribution<double> expo(1.0 / scalar(beta.beta));
  Vector y(n_);
  for (Index i = 0; i < n_; ++i) y(i) = expo(rng);
  return y;
}

double GammaScaleFamily::log_density(double beta, double beta_hat) const {
  const double n = n_;
  return n * std::log(n / beta) + (n - 1.0) * std::log(beta_hat) - n * beta_hat / beta -
         std::lgamma(n);
}

// Poisson -------------------------------------------------------------------

bool PoissonFamily::in_space(const ExpectationPoint& beta) const {
  return beta.beta.size() == 1 && std::isfinite(beta.beta(0)) && beta.beta(0) > 0.0;
}

double PoissonFamily::psi(const CanonicalPoint& alpha) const {
  return std::exp(scalar(alpha.alpha));
}

ExpectationPoint PoissonFamily::mean(const CanonicalPoint& alpha) const {
  return {one(std::exp(scalar(alpha.alpha)))};
}

CanonicalPoint PoissonFamily::canonical(const ExpectationPoint& beta) const {
  if (!in_space(beta)) throw DomainError("poisson: mean must be positive");
  return {one(std::log(beta.beta(0)))};
}

Matrix PoissonFamily::covariance(const CanonicalPoint& alpha) const {
  return Matrix::Constant(1, 1, std::exp(scalar(alpha.alpha)));
}

std::optional<double> PoissonFamily::third_cumulant(const CanonicalPoint& alpha,
                                                    const Vector& v) const {
  const double x = scalar(v);
  return std::exp(scalar(alpha.alpha)) * x * x * x;
}

Replicate PoissonFamily::sample(const MlePoint& mle, Rng& rng) const {
  std::poisson_distribution<long> poisson(mle.beta_hat.beta(0));
  return replicate_at({one(static_cast<double>(poisson(rng)))});
}

// Normal translation --------------------------------------------------------

NormalTranslationFamily::NormalTranslationFamily(Matrix sigma)
    : sigma_(std::move(sigma)), llt_(sigma_) {
  if (sigma_.rows() != sigma_.cols() || llt_.info() != Eigen::Success) {
    throw NumericalError("NormalTranslationFamily: covariance must be symmetric positive definite");
  }
  chol_ = llt_.matrixL();
}

bool NormalTranslationFamily::in_space(const ExpectationPoint& beta) const {
  return beta.beta.size() == sigma_.rows() && beta.beta.allFinite();
}

double NormalTranslationFamily::psi(const CanonicalPoint& alpha) const {
  return 0.5 * alpha.alpha.dot(sigma_ * alpha.alpha);
}

ExpectationPoint NormalTranslationFamily::mean(const CanonicalPoint& alpha) const {
  return {sigma_ * alpha.alpha};
}

CanonicalPoint NormalTranslationFamily::canonical(const ExpectationPoint& beta) const {
  if (!in_space(beta)) throw DomainError("normal_translation: beta has wrong size or is not finite");
  return {llt_.solve(beta.beta)};
}

Matrix NormalTranslationFamily::covariance(const CanonicalPoint&) const { return sigma_; }

std::optional<double> NormalTranslationFamily::third_cumulant(const CanonicalPoint&,
                                                              const Vector&) const {
  return 0.0;
}

double NormalTranslationFamily::delta(const ExpectationPoint&, const MlePoint&) const { return 0.0; }

double NormalTranslationFamily::log_xi(const ExpectationPoint&, const MlePoint&) const { return 0.0; }

Replicate NormalTranslationFamily::sample(const MlePoint& mle, Rng& rng) const {
  return replicate_at({sample_data(mle.beta_hat, rng)});
}

Vector NormalTranslationFamily::sample_data(const ExpectationPoint& beta, Rng& rng) const {
  std::normal_distribution<double> normal;
  Vector z(sigma_.rows());
  for (Index j = 0; j < z.size(); ++j) z(j) = normal(rng);
  return beta.beta + chol_ * z;
}

// Priors --------------------------------------------------------------------

double prior_jeffreys_correlation(double theta) {
  if (!(std::abs(theta) < 1.0)) throw DomainError("correlation prior needs |theta| < 1");
  return 1.0 / (1.0 - theta * theta);
}

double prior_inverse_wishart_log(const Matrix& sigma, const Matrix& scale, double df) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("inverse-Wishart prior: Sigma not SPD");
  const double d = static_cast<double>(sigma.rows());
  const double logdet = log_det_spd(sigma);
  const double trace = (scale * llt.solve(Matrix::Identity(sigma.rows(), sigma.cols()))).trace();
  return -0.5 * (df + d + 1.0) * logdet - 0.5 * trace;
}

}  // namespace bootbayes
