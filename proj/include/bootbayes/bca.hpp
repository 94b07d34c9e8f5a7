#ifndef BOOTBAYES_BCA_HPP
#define BOOTBAYES_BCA_HPP

#include "bootbayes/posterior.hpp"

#include <functional>

namespace bootbayes {

/// Phi^{-1} of the proportion of replications below theta_hat, ties counted as half.
/// Throws NumericalError when the proportion is 0 or 1.
double z0_estimate(const Vector& t, double theta_hat);
double z0_estimate(const BootstrapRun& run, const std::string& statistic_id, double theta_hat);

/// sum d^3 / (6 (sum d^2)^{3/2}) with d = mean - theta_(i) over leave-one-out values.
double jackknife_acceleration(const Vector& leave_one_out);

/// Leave-one-out recomputation of `stat` on the rows of `data`.
Vector leave_one_out(const Matrix& data, const std::function<double(const Matrix&)>& stat);

/// Skewness / 6 of c'beta_hat under alpha_hat, c = V_hat^{-1} grad_alpha t = grad_beta t;
/// the gradient is taken by central differences.
double family_skew_acceleration(const ExponentialFamily& family, const MlePoint& mle,
                                const std::function<double(const ExpectationPoint&)>& t);

/// w_i = phi(z_i/(1 + a z_i) - z0) / [(1 + a z_i)^2 phi(z_i + z0)],
/// z_i = Phi^{-1}(rank_i/(B + 1)) - z0 with average ranks for ties.
WeightVector bca_weights(const Vector& t, const BcaConstants& constants);
WeightVector bca_weights(const BootstrapRun& run, const std::string& statistic_id,
                         const BcaConstants& constants);

Interval bca_interval(const BootstrapRun& run, const std::string& statistic_id,
                      const BcaConstants& constants, double level = 0.95);

/// Per-replication prior pi_i = w_i^BCa / R_i. Reweighting the run with it gives back
/// the BCa weights exactly.
Prior bca_prior(const BootstrapRun& run, const std::string& statistic_id,
                const BcaConstants& constants);

}  // namespace bootbayes

#endif  // BOOTBAYES_BCA_HPP
