#ifndef BOOTBAYES_POISSON_GLM_HPP
#define BOOTBAYES_POISSON_GLM_HPP

#include "bootbayes/expfam.hpp"

namespace bootbayes {

/// Orthonormal polynomial basis of degree m over the points x (J x (m+1), first
/// column constant). Spans the same subspace as R's cbind(1, poly(x, m)), and the
/// first k columns of the degree-m basis span the degree-(k-1) polynomials.
Matrix poly_basis(const Vector& x, int degree);

struct GlmFit {
  Vector alpha;
  Vector eta;
  Vector mu;
  double deviance = 0.0;
  int iterations = 0;
};

/// 2 sum[y log(y / mu) - (y - mu)] with 0 log 0 = 0.
double poisson_deviance(const Vector& y, const Vector& mu);

/// Poisson log-link maximum likelihood by IRLS. Converged when the relative deviance
/// change drops below 1e-10; throws NumericalError after 50 iterations.
GlmFit glm_fit(const Matrix& x, const Vector& y);

/// Poisson deviance difference (eta - eta_hat)'(mu + mu_hat) - 2 * 1'(mu - mu_hat).
template <typename DerivedA, typename DerivedB, typename DerivedC, typename DerivedD>
double glm_delta(const Eigen::MatrixBase<DerivedA>& eta, const Eigen::MatrixBase<DerivedB>& eta_hat,
                 const Eigen::MatrixBase<DerivedC>& mu, const Eigen::MatrixBase<DerivedD>& mu_hat) {
  if (eta.size() != eta_hat.size() || eta.size() != mu.size() || eta.size() != mu_hat.size()) {
    throw ValidationError("glm_delta: length mismatch");
  }
  return (eta - eta_hat).dot(mu + mu_hat) - 2.0 * (mu - mu_hat).sum();
}

/// Independent Poisson counts y_j ~ Poi(mu_hat_j).
Vector glm_sample(const Vector& mu_hat, Rng& rng);

/// Right-tail false discovery rate [1 - Phi(z)] / [1 - F(z)] with F the discretized
/// cdf of the bin expectations mu, half-counting the bin whose center equals z.
double statistic_fdr(const Vector& mu, double z, const Vector& bin_centers);

/// Poisson regression eta = X alpha as a p = m + 1 parameter exponential family
/// with beta_hat = X'y and beta = X'mu.
class PoissonGlmFamily final : public ExponentialFamily {
 public:
  explicit PoissonGlmFamily(Matrix x);

  const Matrix& design() const { return x_; }

  std::string id() const override;
  Index dimension() const override { return x_.cols(); }
  bool in_space(const ExpectationPoint& beta) const override;

  double psi(const CanonicalPoint& alpha) const override;
  ExpectationPoint mean(const CanonicalPoint& alpha) const override;
  /// Solves X' exp(X alpha) = beta by damped Newton.
  CanonicalPoint canonical(const ExpectationPoint& beta) const override;
  Matrix covariance(const CanonicalPoint& alpha) const override;
  std::optional<double> third_cumulant(const CanonicalPoint& alpha, const Vector& v) const override;

  double delta(const ExpectationPoint& beta, const MlePoint& mle) const override;

  Replicate sample(const MlePoint& mle, Rng& rng) const override;
  bool has_data_sampler() const override { return true; }
  Vector sample_data(const ExpectationPoint& beta, Rng& rng) const override;

  Vector eta(const CanonicalPoint& alpha) const { return x_ * alpha.alpha; }
  Vector mu(const CanonicalPoint& alpha) const { return eta(alpha).array().exp(); }

 private:
  Matrix x_;
};

}  // namespace bootbayes

#endif  // BOOTBAYES_POISSON_GLM_HPP
