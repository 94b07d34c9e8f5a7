#include "bootbayes/fisher_correlation.hpp"

#include "bootbayes/numerics.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace bootbayes {

namespace {

void check_unit(double x, const char* what) {
  if (!(std::abs(x) < 1.0)) throw DomainError(std::string(what) + " must lie in (-1, 1)");
}

// log of int_0^inf dw / (cosh w - rho)^(n-1), after factoring out (1 - rho)^-(n-1).
// The remaining integrand starts at 1 and is cut where it falls below 1e-14.
double log_scaled_integral(double rho, int n) {
  const double m = n - 1.0;
  const double one_minus_rho = 1.0 - rho;
  const double cutoff = std::acosh(rho + one_minus_rho * std::pow(10.0, 14.0 / m));
  auto integrand = [=](double w) {
    const double s = std::sinh(0.5 * w);
    return std::exp(-m * std::log1p(2.0 * s * s / one_minus_rho));
  };
  return std::log(integrate(integrand, 0.0, cutoff, 1e-13, 1e-11));
}

}  // namespace

double log_fisher_density(double theta, double theta_hat, int n) {
  check_unit(theta, "theta");
  check_unit(theta_hat, "theta_hat");
  if (n < 4) throw ValidationError("fisher density needs n >= 4");
  const double rho = theta * theta_hat;
  return std::log(n - 2.0) + 0.5 * (n - 1.0) * std::log1p(-theta * theta) +
         0.5 * (n - 4.0) * std::log1p(-theta_hat * theta_hat) - std::log(std::numbers::pi) -
         (n - 1.0) * std::log1p(-rho) + log_scaled_integral(rho, n);
}

double fisher_density(double theta, double theta_hat, int n) {
  return std::exp(log_fisher_density(theta, theta_hat, n));
}

double fisher_cdf(double x, double theta, int n) {
  check_unit(theta, "theta");
  if (x <= -1.0) return 0.0;
  if (x >= 1.0) return 1.0;
  auto density = [=](double t) { return fisher_density(theta, t, n); };
  // Integrate over the shorter side for accuracy in the tails.
  if (x < 0.0) return integrate(density, -1.0, x, 1e-13, 1e-10);
  return 1.0 - integrate(density, x, 1.0, 1e-13, 1e-10);
}

std::pair<double, double> fisher_exact_ci(double theta_hat, int n, double coverage) {
  check_unit(theta_hat, "theta_hat");
  if (!(coverage > 0.0 && coverage < 1.0)) throw ValidationError("coverage must lie in (0, 1)");
  const double tail = 0.5 * (1.0 - coverage);
  constexpr double kEdge = 1.0 - 1e-9;
  auto upper_tail = [=](double theta) {
    auto density = [=](double t) { return fisher_density(theta, t, n); };
    return integrate(density, theta_hat, 1.0, 1e-13, 1e-10) - tail;
  };
  auto lower_tail = [=](double theta) {
    auto density = [=](double t) { return fisher_density(theta, t, n); };
    return integrate(density, -1.0, theta_hat, 1e-13, 1e-10) - tail;
  };
  const double lo = bisect(upper_tail, -kEdge, theta_hat, 1e-7);
  const double hi = bisect(lower_tail, theta_hat, kEdge, 1e-7);
  return {lo, hi};
}

FisherCorrelationFamily::FisherCorrelationFamily(int n) : n_(n) {
  if (n < 4) throw ValidationError("FisherCorrelationFamily: n must be at least 4");
}

bool FisherCorrelationFamily::in_space(const ExpectationPoint& beta) const {
  return beta.beta.size() == 1 && std::abs(beta.beta(0)) < 1.0;
}

MlePoint FisherCorrelationFamily::mle_point(const ExpectationPoint& beta_hat) const {
  if (!in_space(beta_hat)) throw DomainError("fisher_correlation: theta_hat must lie in (-1, 1)");
  return MlePoint{beta_hat, {}, {}};
}

Replicate FisherCorrelationFamily::sample(const MlePoint& mle, Rng& rng) const {
  const double rho = mle.beta_hat.beta(0);
  const double c = std::sqrt(1.0 - rho * rho);
  std::normal_distribution<double> normal;
  double s1 = 0.0, s2 = 0.0, s11 = 0.0, s22 = 0.0, s12 = 0.0;
  for (int i = 0; i < n_; ++i) {
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    const double y1 = z1;
    const double y2 = rho * z1 + c * z2;
    s1 += y1;
    s2 += y2;
    s11 += y1 * y1;
    s22 += y2 * y2;
    s12 += y1 * y2;
  }
  const double n = n_;
  const double c11 = s11 - s1 * s1 / n;
  const double c22 = s22 - s2 * s2 / n;
  const double c12 = s12 - s1 * s2 / n;
  return replicate_at({Vector::Constant(1, c12 / std::sqrt(c11 * c22))});
}

Replicate FisherCorrelationFamily::replicate_at(const ExpectationPoint& beta) const {
  return Replicate{beta, {}};
}

double FisherCorrelationFamily::delta(const ExpectationPoint& beta, const MlePoint& mle) const {
  const double theta = beta.beta(0);
  const double theta_hat = mle.beta_hat.beta(0);
  return log_fisher_density(theta, theta_hat, n_) - log_fisher_density(theta_hat, theta, n_);
}

double FisherCorrelationFamily::log_xi(const ExpectationPoint&, const MlePoint&) const { return 0.0; }

double FisherCorrelationFamily::log_density_ratio(const ExpectationPoint& num,
                                                  const ExpectationPoint& den,
                                                  const ExpectationPoint& at) const {
  return log_fisher_density(num.beta(0), at.beta(0), n_) -
         log_fisher_density(den.beta(0), at.beta(0), n_);
}

}  // namespace bootbayes
