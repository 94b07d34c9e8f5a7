#ifndef BOOTBAYES_ACCURACY_HPP
#define BOOTBAYES_ACCURACY_HPP

#include "bootbayes/posterior.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace bootbayes {

/// Delta-method coefficient of variation of sum(t r)/sum(r) over the B replications,
/// r the raw weights:
/// cv^2 = (c_ss/s^2 - 2 c_sr/(s r) + c_rr/r^2) / B with s_i = t_i r_i.
/// NaN when the weighted estimate is exactly zero.
double internal_cv(const Vector& t, const WeightVector& w);
double internal_cv(const BootstrapRun& run, const WeightVector& w, const std::string& statistic_id);

/// log W_i = log f_{beta_i}(gamma) - log f_{beta_i}(beta_hat) up to a constant in i:
/// (alpha_i - alpha_hat)'(gamma - beta_hat) when the run stores alpha, else the family's
/// log-density ratio. Exactly zero when gamma == beta_hat.
Vector bab_log_multipliers(const Family& family, const BootstrapRun& run,
                           const ExpectationPoint& gamma);

/// Reweighted posterior quantity: the mean, or a weighted quantile at `prob`.
struct Quantity {
  enum class Kind { mean, quantile } kind = Kind::mean;
  double prob = 0.5;
  static Quantity mean() { return {}; }
  static Quantity quantile(double p) { return {Kind::quantile, p}; }
  double operator()(const Vector& t, const WeightVector& w) const;
  std::string label() const;
};

struct AccuracyReport {
  std::string statistic;
  std::string quantity;
  std::string method;  // "bab" or "jackknife"
  Index count = 0;     // K or n
  double estimate = 0.0;
  std::vector<double> values;  // q_k, one per surviving outer point
  std::vector<double> ess;
  double se = 0.0;
  double cv_internal = 0.0;
  double max_abs_log_w = 0.0;
  std::vector<Index> dropped;
  std::vector<std::string> warnings;
};

nlohmann::json to_json(const AccuracyReport& r);

/// Bootstrap-after-bootstrap: K outer draws gamma_k ~ f_{beta_hat} on substreams
/// offset by 2^63, q_k from weights pi_i R_i W_ki, se with divisor K - 1.
AccuracyReport bab_standard_error(const Family& family, const BootstrapRun& run, const Prior& prior,
                                  const std::string& statistic_id, Index K, std::uint64_t seed,
                                  Quantity quantity = Quantity::mean(), int threads = 1);

/// Same machinery at caller-supplied outer points.
AccuracyReport reweighted_standard_error(const Family& family, const BootstrapRun& run,
                                         const Prior& prior, const std::string& statistic_id,
                                         const std::vector<ExpectationPoint>& outer,
                                         Quantity quantity, const std::string& method,
                                         int threads = 1);

/// Jackknife: outer points are the leave-one-out MLEs; se = [((n-1)/n) sum (q_k - q.)^2]^{1/2}.
AccuracyReport jackknife_standard_error(const Family& family, const BootstrapRun& run,
                                        const Prior& prior, const std::string& statistic_id,
                                        const std::vector<ExpectationPoint>& loo_mles,
                                        Quantity quantity = Quantity::mean(), int threads = 1);

}  // namespace bootbayes

#endif  // BOOTBAYES_ACCURACY_HPP
