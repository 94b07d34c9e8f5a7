#ifndef BOOTBAYES_FISHER_CORRELATION_HPP
#define BOOTBAYES_FISHER_CORRELATION_HPP

#include "bootbayes/expfam.hpp"

#include <utility>

namespace bootbayes {

/// log f_theta(theta_hat): Fisher's exact density of the sample correlation of n
/// bivariate normal observations with true correlation theta.
double log_fisher_density(double theta, double theta_hat, int n);
double fisher_density(double theta, double theta_hat, int n);

/// Pr_theta{theta_hat <= x}.
double fisher_cdf(double x, double theta, int n);

/// Exact central confidence interval: lo solves Pr_lo{theta_hat >= observed} = (1 - coverage)/2,
/// hi solves Pr_hi{theta_hat <= observed} = (1 - coverage)/2.
std::pair<double, double> fisher_exact_ci(double theta_hat, int n, double coverage = 0.95);

/// The correlation coefficient alone, with R(theta) = f_theta(theta_hat) / f_theta_hat(theta)
/// taken directly from the density. Not an exponential family: `delta()` returns log R.
class FisherCorrelationFamily final : public Family {
 public:
  explicit FisherCorrelationFamily(int n);

  int n() const { return n_; }

  std::string id() const override { return "fisher_correlation(n=" + std::to_string(n_) + ")"; }
  Index dimension() const override { return 1; }
  bool in_space(const ExpectationPoint& beta) const override;
  bool has_canonical() const override { return false; }
  bool direct_density() const override { return true; }

  MlePoint mle_point(const ExpectationPoint& beta_hat) const override;
  Replicate sample(const MlePoint& mle, Rng& rng) const override;
  Replicate replicate_at(const ExpectationPoint& beta) const override;

  double delta(const ExpectationPoint& beta, const MlePoint& mle) const override;
  double log_xi(const ExpectationPoint& beta, const MlePoint& mle) const override;
  double log_density_ratio(const ExpectationPoint& num, const ExpectationPoint& den,
                           const ExpectationPoint& at) const override;

 private:
  int n_;
};

}  // namespace bootbayes

#endif  // BOOTBAYES_FISHER_CORRELATION_HPP
