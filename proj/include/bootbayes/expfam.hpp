#ifndef BOOTBAYES_EXPFAM_HPP
#define BOOTBAYES_EXPFAM_HPP

#include "bootbayes/core.hpp"
#include "bootbayes/rng.hpp"

#include <optional>
#include <string>

namespace bootbayes {

/// Anything the sampler can bootstrap and the posterior module can reweight.
///
/// Exponential families split the log conversion factor as log R = log xi + Delta.
/// Families that only supply a density (the Fisher correlation density) report
/// `direct_density() == true`, return the whole log R from `delta()` and zero from `log_xi()`.
class Family {
 public:
  virtual ~Family() = default;

  virtual std::string id() const = 0;
  virtual Index dimension() const = 0;
  virtual bool in_space(const ExpectationPoint& beta) const = 0;
  virtual bool has_canonical() const = 0;
  virtual bool direct_density() const { return false; }

  virtual MlePoint mle_point(const ExpectationPoint& beta_hat) const = 0;

  /// One parametric bootstrap draw from f_{beta_hat}.
  virtual Replicate sample(const MlePoint& mle, Rng& rng) const = 0;

  /// Replicate record for an externally supplied point (expanded proposals, store reloads).
  virtual Replicate replicate_at(const ExpectationPoint& beta) const = 0;

  virtual double delta(const ExpectationPoint& beta, const MlePoint& mle) const = 0;
  virtual double log_xi(const ExpectationPoint& beta, const MlePoint& mle) const = 0;

  /// log f_num(at) - log f_den(at).
  virtual double log_density_ratio(const ExpectationPoint& num, const ExpectationPoint& den,
                                   const ExpectationPoint& at) const = 0;

  /// Full-data sampler g_beta(.) for posterior predictive draws.
  virtual bool has_data_sampler() const { return false; }
  virtual Vector sample_data(const ExpectationPoint& beta, Rng& rng) const;
};

/// p-parameter exponential family f_beta(beta_hat) = exp(alpha'beta_hat - psi(alpha)) f_0(beta_hat).
class ExponentialFamily : public Family {
 public:
  bool has_canonical() const override { return true; }

  virtual double psi(const CanonicalPoint& alpha) const = 0;
  virtual ExpectationPoint mean(const CanonicalPoint& alpha) const = 0;
  virtual CanonicalPoint canonical(const ExpectationPoint& beta) const = 0;
  virtual Matrix covariance(const CanonicalPoint& alpha) const = 0;

  /// sum_jkl U_jkl v_j v_k v_l; families without third cumulants return nullopt.
  virtual std::optional<double> third_cumulant(const CanonicalPoint& alpha, const Vector& v) const {
    (void)alpha;
    (void)v;
    return std::nullopt;
  }

  MlePoint mle_point(const ExpectationPoint& beta_hat) const override;
  Replicate replicate_at(const ExpectationPoint& beta) const override;
  double delta(const ExpectationPoint& beta, const MlePoint& mle) const override;
  double log_xi(const ExpectationPoint& beta, const MlePoint& mle) const override;
  double log_density_ratio(const ExpectationPoint& num, const ExpectationPoint& den,
                           const ExpectationPoint& at) const override;
};

/// D(beta1, beta2) = 2[(alpha1 - alpha2)'beta1 - (psi(alpha1) - psi(alpha2))].
double deviance(const ExponentialFamily& model, const ExpectationPoint& beta1,
                const ExpectationPoint& beta2);

/// Delta(beta) = (alpha - alpha_hat)'(beta + beta_hat) - 2[psi(alpha) - psi(alpha_hat)],
/// the half difference of the two deviances between beta and beta_hat.
double deviance_difference(const ExponentialFamily& model, const ExpectationPoint& beta,
                           const MlePoint& mle);

/// |V(alpha)|^{1/2} / |V(alpha_hat)|^{1/2}, treated as exact.
double xi_factor(const ExponentialFamily& model, const ExpectationPoint& beta, const MlePoint& mle);
double log_xi_factor(const ExponentialFamily& model, const ExpectationPoint& beta,
                     const MlePoint& mle);

/// log R(beta) = log xi(beta) + Delta(beta).
double conversion_factor(const ExponentialFamily& model, const ExpectationPoint& beta,
                         const MlePoint& mle);

/// Cubic approximation gamma_hat Z^3 / 6 of Delta in a one-parameter family,
/// with Z = v_hat^{-1/2}(beta - beta_hat).
double cubic_delta_approx(const MlePoint& mle, double skewness_hat, const ExpectationPoint& beta);

/// Directional form: skewness and Z measured along the canonical direction v.
double cubic_delta_approx(const ExponentialFamily& model, const MlePoint& mle, const Vector& v,
                          const ExpectationPoint& beta);

/// Skewness U^(v) / V^(v)^{3/2} of v'beta_hat under alpha_hat.
double directional_skewness(const ExponentialFamily& model, const MlePoint& mle, const Vector& v);

}  // namespace bootbayes

#endif  // BOOTBAYES_EXPFAM_HPP
