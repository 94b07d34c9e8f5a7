#ifndef BOOTBAYES_MVNORMAL_HPP
#define BOOTBAYES_MVNORMAL_HPP

#include "bootbayes/expfam.hpp"
#include "bootbayes/numerics.hpp"

namespace bootbayes {

/// Mean/covariance coordinates gamma = (mu, Sigma) of a d-variate normal.
template <typename Scalar>
struct MvnPoint {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mu;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> sigma;
};

using MvnParams = MvnPoint<double>;

/// Deviance between two d-variate normals for a single observation:
/// log|S2|/|S1| + (m2 - m1)'S2^-1(m2 - m1) + tr(S1 S2^-1) - d.
template <typename Scalar>
Scalar mvn_unit_deviance(const MvnPoint<Scalar>& g1, const MvnPoint<Scalar>& g2) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::LLT<Mat> llt2(g2.sigma);
  if (llt2.info() != Eigen::Success) throw NumericalError("mvn deviance: Sigma_2 not SPD");
  const auto diff = (g2.mu - g1.mu).eval();
  const Scalar quad = diff.dot(llt2.solve(diff));
  const Scalar trace = llt2.solve(g1.sigma).trace();
  return log_det_spd(g2.sigma) - log_det_spd(g1.sigma) + quad + trace -
         static_cast<Scalar>(g1.mu.size());
}

/// Deviance difference in (mu, Sigma) coordinates for sample size n:
/// n{ d'[(S_hat^-1 - S^-1)/2]d + tr(S S_hat^-1 - S_hat S^-1)/2 + log(|S_hat|/|S|) }.
template <typename Scalar>
Scalar mvn_delta(const MvnPoint<Scalar>& gamma, const MvnPoint<Scalar>& gamma_hat, int n) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::LLT<Mat> llt(gamma.sigma);
  Eigen::LLT<Mat> llt_hat(gamma_hat.sigma);
  if (llt.info() != Eigen::Success || llt_hat.info() != Eigen::Success) {
    throw NumericalError("mvn_delta: covariance not SPD");
  }
  const auto d = (gamma.mu - gamma_hat.mu).eval();
  const Scalar quad = d.dot(llt_hat.solve(d)) - d.dot(llt.solve(d));
  const Scalar trace = llt_hat.solve(gamma.sigma).trace() - llt.solve(gamma_hat.sigma).trace();
  const Scalar logdet = log_det_spd(gamma_hat.sigma) - log_det_spd(gamma.sigma);
  return static_cast<Scalar>(n) * (quad / Scalar(2) + trace / Scalar(2) + logdet);
}

/// log xi = ((d + 2)/2)(log|Sigma| - log|Sigma_hat|).
template <typename DerivedA, typename DerivedB>
double mvn_log_xi(const Eigen::MatrixBase<DerivedA>& sigma,
                  const Eigen::MatrixBase<DerivedB>& sigma_hat) {
  const double d = static_cast<double>(sigma.rows());
  return 0.5 * (d + 2.0) * (log_det_spd(sigma) - log_det_spd(sigma_hat));
}

template <typename DerivedA, typename DerivedB>
double mvn_xi(const Eigen::MatrixBase<DerivedA>& sigma, const Eigen::MatrixBase<DerivedB>& sigma_hat) {
  return std::exp(mvn_log_xi(sigma, sigma_hat));
}

/// Log kernel of the density of (mu_hat, Sigma_hat) at parameters gamma, dropping
/// every factor that depends only on the evaluation point.
template <typename Scalar>
Scalar mvn_log_kernel(const MvnPoint<Scalar>& gamma, const MvnPoint<Scalar>& at, int n) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Eigen::LLT<Mat> llt(gamma.sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("mvn kernel: Sigma not SPD");
  const auto d = (at.mu - gamma.mu).eval();
  const Scalar nn = static_cast<Scalar>(n);
  const Scalar logdet = log_det_spd(gamma.sigma);
  return -logdet / Scalar(2) - nn * d.dot(llt.solve(d)) / Scalar(2) -
         (nn - Scalar(1)) * logdet / Scalar(2) - nn * llt.solve(at.sigma).trace() / Scalar(2);
}

/// log f_num(at) - log f_den(at) for the (mu_hat, Sigma_hat) density.
template <typename Scalar>
Scalar mvn_log_density_ratio(const MvnPoint<Scalar>& num, const MvnPoint<Scalar>& den,
                             const MvnPoint<Scalar>& at, int n) {
  return mvn_log_kernel(num, at, n) - mvn_log_kernel(den, at, n);
}

/// MLE (divisor n) of rows i.i.d. N_d(mu, Sigma).
MvnParams mvn_mle(const Matrix& rows);

/// n i.i.d. d-variate normal observations summarized by their MLE.
///
/// Expectation coordinates: beta = (mean of y, mean of y_j y_k for j <= k, row-major),
/// so p = d(d + 3)/2. The map beta -> (mu, Sigma) has unit Jacobian.
class MvNormalFamily final : public ExponentialFamily {
 public:
  MvNormalFamily(int d, int n);

  int d() const { return d_; }
  int n() const { return n_; }

  std::string id() const override;
  Index dimension() const override { return d_ * (d_ + 3) / 2; }
  bool in_space(const ExpectationPoint& beta) const override;

  ExpectationPoint to_beta(const MvnParams& gamma) const;
  MvnParams to_params(const ExpectationPoint& beta) const;

  double psi(const CanonicalPoint& alpha) const override;
  ExpectationPoint mean(const CanonicalPoint& alpha) const override;
  CanonicalPoint canonical(const ExpectationPoint& beta) const override;
  Matrix covariance(const CanonicalPoint& alpha) const override;
  /// Third cumulant of v'beta_hat: kappa_3(a'y + y'Ay)/n^2 for one observation y.
  std::optional<double> third_cumulant(const CanonicalPoint& alpha, const Vector& v) const override;

  double delta(const ExpectationPoint& beta, const MlePoint& mle) const override;
  double log_xi(const ExpectationPoint& beta, const MlePoint& mle) const override;
  double log_density_ratio(const ExpectationPoint& num, const ExpectationPoint& den,
                           const ExpectationPoint& at) const override;

  Replicate sample(const MlePoint& mle, Rng& rng) const override;
  bool has_data_sampler() const override { return true; }
  /// n x d data set flattened row-major.
  Vector sample_data(const ExpectationPoint& beta, Rng& rng) const override;

  /// n draws from N_d(mu, Sigma); rows are observations.
  Matrix sample_rows(const MvnParams& gamma, Rng& rng) const;

 private:
  MvnParams params_from_canonical(const CanonicalPoint& alpha) const;

  int d_;
  int n_;
};

}  // namespace bootbayes

#endif  // BOOTBAYES_MVNORMAL_HPP
