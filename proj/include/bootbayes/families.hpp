#ifndef BOOTBAYES_FAMILIES_HPP
#define BOOTBAYES_FAMILIES_HPP

#include "bootbayes/expfam.hpp"
#include "bootbayes/numerics.hpp"

#include <cmath>

namespace bootbayes {

/// beta_hat ~ beta * Gamma_n / n on (0, inf): the mean of n exponentials with mean beta.
class GammaScaleFamily final : public ExponentialFamily {
 public:
  explicit GammaScaleFamily(int n);

  int n() const { return n_; }

  std::string id() const override { return "gamma_scale(n=" + std::to_string(n_) + ")"; }
  Index dimension() const override { return 1; }
  bool in_space(const ExpectationPoint& beta) const override;

  double psi(const CanonicalPoint& alpha) const override;
  ExpectationPoint mean(const CanonicalPoint& alpha) const override;
  CanonicalPoint canonical(const ExpectationPoint& beta) const override;
  Matrix covariance(const CanonicalPoint& alpha) const override;
  std::optional<double> third_cumulant(const CanonicalPoint& alpha, const Vector& v) const override;

  Replicate sample(const MlePoint& mle, Rng& rng) const override;
  bool has_data_sampler() const override { return true; }
  Vector sample_data(const ExpectationPoint& beta, Rng& rng) const override;

  /// Exact log density of beta_hat given beta.
  double log_density(double beta, double beta_hat) const;

 private:
  int n_;
};

/// One Poisson count: beta = mu, alpha = log mu.
class PoissonFamily final : public ExponentialFamily {
 public:
  std::string id() const override { return "poisson"; }
  Index dimension() const override { return 1; }
  bool in_space(const ExpectationPoint& beta) const override;

  double psi(const CanonicalPoint& alpha) const override;
  ExpectationPoint mean(const CanonicalPoint& alpha) const override;
  CanonicalPoint canonical(const ExpectationPoint& beta) const override;
  Matrix covariance(const CanonicalPoint& alpha) const override;
  std::optional<double> third_cumulant(const CanonicalPoint& alpha, const Vector& v) const override;

  Replicate sample(const MlePoint& mle, Rng& rng) const override;
};

/// beta_hat ~ N_p(beta, Sigma) with Sigma fixed. Delta and xi are identically 0 and 1.
class NormalTranslationFamily final : public ExponentialFamily {
 public:
  explicit NormalTranslationFamily(Matrix sigma);

  std::string id() const override { return "normal_translation(p=" + std::to_string(sigma_.rows()) + ")"; }
  Index dimension() const override { return sigma_.rows(); }
  bool in_space(const ExpectationPoint& beta) const override;

  double psi(const CanonicalPoint& alpha) const override;
  ExpectationPoint mean(const CanonicalPoint& alpha) const override;
  CanonicalPoint canonical(const ExpectationPoint& beta) const override;
  Matrix covariance(const CanonicalPoint& alpha) const override;
  std::optional<double> third_cumulant(const CanonicalPoint& alpha, const Vector& v) const override;

  double delta(const ExpectationPoint& beta, const MlePoint& mle) const override;
  double log_xi(const ExpectationPoint& beta, const MlePoint& mle) const override;

  Replicate sample(const MlePoint& mle, Rng& rng) const override;
  bool has_data_sampler() const override { return true; }
  Vector sample_data(const ExpectationPoint& beta, Rng& rng) const override;

 private:
  Matrix sigma_;
  Eigen::LLT<Matrix> llt_;
  Matrix chol_;
};

// ---------------------------------------------------------------------------
// Statistics and priors evaluated by the studies.

/// Sigma_12 / sqrt(Sigma_11 Sigma_22).
template <typename Derived>
typename Derived::Scalar statistic_correlation(const Eigen::MatrixBase<Derived>& sigma) {
  using std::sqrt;
  return sigma(0, 1) / sqrt(sigma(0, 0) * sigma(1, 1));
}

/// lambda_1 / (lambda_1 + lambda_2) for a 2x2 symmetric positive definite matrix.
template <typename Derived>
typename Derived::Scalar statistic_eigenratio(const Eigen::MatrixBase<Derived>& sigma) {
  using std::sqrt;
  using Scalar = typename Derived::Scalar;
  const Scalar half_trace = (sigma(0, 0) + sigma(1, 1)) / Scalar(2);
  const Scalar half_gap = (sigma(0, 0) - sigma(1, 1)) / Scalar(2);
  const Scalar radius = sqrt(half_gap * half_gap + sigma(0, 1) * sigma(1, 0));
  return (half_trace + radius) / (Scalar(2) * half_trace);
}

/// AIC(m) = deviance + 2(m + 1).
inline double aic(double deviance, int degree) { return deviance + 2.0 * (degree + 1); }

/// Unnormalized Jeffreys prior 1 / (1 - theta^2) for a correlation.
double prior_jeffreys_correlation(double theta);

/// Unnormalized inverse-Wishart log kernel -(df + d + 1)/2 log|Sigma| - tr(scale Sigma^-1)/2.
double prior_inverse_wishart_log(const Matrix& sigma, const Matrix& scale, double df);

}  // namespace bootbayes

#endif  // BOOTBAYES_FAMILIES_HPP
