#include "bootbayes/bca.hpp"

#include "bootbayes/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bootbayes {

double z0_estimate(const Vector& t, double theta_hat) {
  const Index B = t.size();
  if (B < 1) throw ValidationError("z0 needs at least one replication");
  double below = 0.0;
  for (Index i = 0; i < B; ++i) {
    if (t(i) < theta_hat) below += 1.0;
    else if (t(i) == theta_hat) below += 0.5;
  }
  const double p = below / static_cast<double>(B);
  if (p <= 0.0 || p >= 1.0) {
    throw NumericalError("z0 is infinite: every replication lies on one side of theta_hat; increase B");
  }
  return normal_quantile(p);
}

double z0_estimate(const BootstrapRun& run, const std::string& statistic_id, double theta_hat) {
  return z0_estimate(run.stat(statistic_id), theta_hat);
}

double jackknife_acceleration(const Vector& loo) {
  if (loo.size() < 2) throw ValidationError("jackknife acceleration needs n >= 2");
  const Vector d = loo.mean() - loo.array();
  const double ss = d.squaredNorm();
  if (!(ss > 0.0)) throw NumericalError("jackknife acceleration: zero jackknife variance");
  return d.array().cube().sum() / (6.0 * std::pow(ss, 1.5));
}

Vector leave_one_out(const Matrix& data, const std::function<double(const Matrix&)>& stat) {
  const Index n = data.rows();
  if (n < 2) throw ValidationError("leave-one-out needs n >= 2");
  Vector out(n);
  Matrix sub(n - 1, data.cols());
  for (Index k = 0; k < n; ++k) {
    Index r = 0;
    for (Index i = 0; i < n; ++i) {
      if (i != k) sub.row(r++) = data.row(i);
    }
    out(k) = stat(sub);
  }
  return out;
}

double family_skew_acceleration(const ExponentialFamily& family, const MlePoint& mle,
                                const std::function<double(const ExpectationPoint&)>& t) {
  const Vector& b = mle.beta_hat.beta;
  const Index p = b.size();
  Vector grad(p);
  for (Index j = 0; j < p; ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(b(j)));
    ExpectationPoint up{b}, down{b};
    up.beta(j) += h;
    down.beta(j) -= h;
    grad(j) = (t(up) - t(down)) / (2.0 * h);
  }
  // least favorable direction in alpha: V^{-1} grad_alpha t = grad_beta t
  return directional_skewness(family, mle, grad) / 6.0;
}

namespace {

Vector average_ranks(const Vector& t) {
  const Index B = t.size();
  std::vector<Index> order(static_cast<std::size_t>(B));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return t(a) < t(b); });
  Vector rank(B);
  Index k = 0;
  while (k < B) {
    Index e = k;
    while (e + 1 < B && t(order[static_cast<std::size_t>(e + 1)]) == t(order[static_cast<std::size_t>(k)])) ++e;
    const double avg = 0.5 * static_cast<double>(k + e) + 1.0;
    for (Index j = k; j <= e; ++j) rank(order[static_cast<std::size_t>(j)]) = avg;
    k = e + 1;
  }
  return rank;
}

Vector bca_log_raw(const Vector& t, const BcaConstants& c) {
  const Index B = t.size();
  if (B < 1) throw ValidationError("BCa weights need at least one replication");
  const Vector rank = average_ranks(t);
  Vector log_w(B);
  for (Index i = 0; i < B; ++i) {
    const double z = normal_quantile(rank(i) / static_cast<double>(B + 1)) - c.z0;
    const double s = 1.0 + c.a * z;
    if (!(s > 0.0)) {
      throw NumericalError("BCa weight undefined at replication " + std::to_string(i) +
                           ": 1 + a z = " + std::to_string(s));
    }
    log_w(i) = log_normal_pdf(z / s - c.z0) - 2.0 * std::log(s) - log_normal_pdf(z + c.z0);
  }
  return log_w;
}

}  // namespace

WeightVector bca_weights(const Vector& t, const BcaConstants& constants) {
  return normalize_log_weights(bca_log_raw(t, constants), "bca", "");
}

WeightVector bca_weights(const BootstrapRun& run, const std::string& statistic_id,
                         const BcaConstants& constants) {
  return normalize_log_weights(bca_log_raw(run.stat(statistic_id), constants), "bca", run_id(run));
}

Interval bca_interval(const BootstrapRun& run, const std::string& statistic_id,
                      const BcaConstants& constants, double level) {
  return credible_interval(run, bca_weights(run, statistic_id, constants), statistic_id, level);
}

Prior bca_prior(const BootstrapRun& run, const std::string& statistic_id,
                const BcaConstants& constants) {
  Prior p;
  p.id = "bca";
  p.kind = PriorKind::posterior_weight;
  p.log_posterior = bca_log_raw(run.stat(statistic_id), constants);
  p.log_values = p.log_posterior - run.log_conversion();
  return p;
}

}  // namespace bootbayes
