#include "bootbayes/expfam.hpp"

#include "bootbayes/numerics.hpp"

#include <cmath>

namespace bootbayes {

Vector Family::sample_data(const ExpectationPoint&, Rng&) const {
  throw ValidationError("family " + id() + " has no full-data sampler");
}

MlePoint ExponentialFamily::mle_point(const ExpectationPoint& beta_hat) const {
  CanonicalPoint alpha_hat = canonical(beta_hat);
  Matrix v_hat = covariance(alpha_hat);
  return MlePoint{beta_hat, std::move(alpha_hat), std::move(v_hat)};
}

Replicate ExponentialFamily::replicate_at(const ExpectationPoint& beta) const {
  return Replicate{beta, canonical(beta)};
}

double ExponentialFamily::delta(const ExpectationPoint& beta, const MlePoint& mle) const {
  return deviance_difference(*this, beta, mle);
}

double ExponentialFamily::log_xi(const ExpectationPoint& beta, const MlePoint& mle) const {
  return log_xi_factor(*this, beta, mle);
}

double ExponentialFamily::log_density_ratio(const ExpectationPoint& num,
                                            const ExpectationPoint& den,
                                            const ExpectationPoint& at) const {
  const CanonicalPoint a_num = canonical(num);
  const CanonicalPoint a_den = canonical(den);
  return (a_num.alpha - a_den.alpha).dot(at.beta) - (psi(a_num) - psi(a_den));
}

double deviance(const ExponentialFamily& model, const ExpectationPoint& beta1,
                const ExpectationPoint& beta2) {
  const CanonicalPoint a1 = model.canonical(beta1);
  const CanonicalPoint a2 = model.canonical(beta2);
  return 2.0 * ((a1.alpha - a2.alpha).dot(beta1.beta) - (model.psi(a1) - model.psi(a2)));
}

double deviance_difference(const ExponentialFamily& model, const ExpectationPoint& beta,
                           const MlePoint& mle) {
  const CanonicalPoint alpha = model.canonical(beta);
  return (alpha.alpha - mle.alpha_hat.alpha).dot(beta.beta + mle.beta_hat.beta) -
         2.0 * (model.psi(alpha) - model.psi(mle.alpha_hat));
}

double log_xi_factor(const ExponentialFamily& model, const ExpectationPoint& beta,
                     const MlePoint& mle) {
  const Matrix v = model.covariance(model.canonical(beta));
  return 0.5 * (log_det_spd(v) - log_det_spd(mle.v_hat));
}

double xi_factor(const ExponentialFamily& model, const ExpectationPoint& beta, const MlePoint& mle) {
  return std::exp(log_xi_factor(model, beta, mle));
}

double conversion_factor(const ExponentialFamily& model, const ExpectationPoint& beta,
                         const MlePoint& mle) {
  return log_xi_factor(model, beta, mle) + deviance_difference(model, beta, mle);
}

double cubic_delta_approx(const MlePoint& mle, double skewness_hat, const ExpectationPoint& beta) {
  if (mle.beta_hat.beta.size() != 1 || beta.beta.size() != 1) {
    throw ValidationError("cubic_delta_approx: one-parameter form needs p = 1; supply a direction");
  }
  const double z = (beta.beta(0) - mle.beta_hat.beta(0)) / std::sqrt(mle.v_hat(0, 0));
  return skewness_hat * z * z * z / 6.0;
}

double directional_skewness(const ExponentialFamily& model, const MlePoint& mle, const Vector& v) {
  const std::optional<double> u = model.third_cumulant(mle.alpha_hat, v);
  if (!u) {
    throw ValidationError("family " + model.id() + " has no third cumulant");
  }
  const double var = v.dot(mle.v_hat * v);
  return *u / std::pow(var, 1.5);
}

double cubic_delta_approx(const ExponentialFamily& model, const MlePoint& mle, const Vector& v,
                          const ExpectationPoint& beta) {
  const double gamma = directional_skewness(model, mle, v);
  const double z = v.dot(beta.beta - mle.beta_hat.beta) / std::sqrt(v.dot(mle.v_hat * v));
  return gamma * z * z * z / 6.0;
}

}  // namespace bootbayes
