#include "bootbayes/accuracy.hpp"

#include "bootbayes/rng.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace bootbayes {

double internal_cv(const Vector& t, const WeightVector& w) {
  const Index B = t.size();
  if (B < 2) throw ValidationError("internal cv needs B >= 2");
  if (w.size() != B) throw ValidationError("statistic and weights differ in length");
  const Vector r = (w.log_raw.array() - w.log_raw.maxCoeff()).exp();
  const Vector s = t.cwiseProduct(r);
  const double s_bar = s.mean();
  const double r_bar = r.mean();
  if (r_bar == 0.0) throw NumericalError("internal cv: weights underflow");
  // cv of a zero estimate is undefined (e.g. a model never selected)
  if (s_bar == 0.0) return std::numeric_limits<double>::quiet_NaN();
  const Vector ds = s.array() - s_bar;
  const Vector dr = r.array() - r_bar;
  const double c_ss = ds.squaredNorm() / B;
  const double c_sr = ds.dot(dr) / B;
  const double c_rr = dr.squaredNorm() / B;
  const double cv2 =
      (c_ss / (s_bar * s_bar) - 2.0 * c_sr / (s_bar * r_bar) + c_rr / (r_bar * r_bar)) / B;
  return std::sqrt(std::max(cv2, 0.0));
}

double internal_cv(const BootstrapRun& run, const WeightVector& w, const std::string& statistic_id) {
  return internal_cv(run.stat(statistic_id), w);
}

Vector bab_log_multipliers(const Family& family, const BootstrapRun& run,
                           const ExpectationPoint& gamma) {
  const Index B = run.size();
  const Vector shift = gamma.beta - run.mle.beta_hat.beta;
  if (run.alpha.cols() > 0) {
    return (run.alpha.rowwise() - run.mle.alpha_hat.alpha.transpose()) * shift;
  }
  Vector out(B);
  if (shift.isZero(0.0)) {
    out.setZero();
    return out;
  }
  for (Index i = 0; i < B; ++i) {
    const ExpectationPoint bi{run.beta.row(i).transpose()};
    out(i) = family.log_density_ratio(bi, run.mle.beta_hat, gamma) -
             family.log_density_ratio(bi, run.mle.beta_hat, run.mle.beta_hat);
  }
  return out;
}

double Quantity::operator()(const Vector& t, const WeightVector& w) const {
  if (kind == Kind::mean) return posterior_expectation(t, w);
  return weighted_quantile(t, w.w, prob);
}

std::string Quantity::label() const {
  if (kind == Kind::mean) return "mean";
  char buf[32];
  std::snprintf(buf, sizeof buf, "quantile(%g)", prob);
  return buf;
}

nlohmann::json to_json(const AccuracyReport& r) {
  return {
      {"statistic", r.statistic},   {"quantity", r.quantity},       {"method", r.method},
      {"count", r.count},           {"estimate", r.estimate},       {"se", r.se},
      {"q_k", r.values},            {"ess_k", r.ess},               {"cv_internal", r.cv_internal},
      {"max_abs_log_w", r.max_abs_log_w}, {"dropped", r.dropped},   {"warnings", r.warnings},
  };
}

namespace {

AccuracyReport reweight_all(const Family& family, const BootstrapRun& run, const Prior& prior,
                            const std::string& statistic_id,
                            const std::vector<ExpectationPoint>& outer, Quantity quantity,
                            const std::string& method, int threads) {
  const Index K = static_cast<Index>(outer.size());
  if (K < 2) throw ValidationError(method + " standard error needs at least 2 outer points");
  const Vector t = run.stat(statistic_id);
  const WeightVector base = importance_weights(run, prior);
  const double B = static_cast<double>(run.size());

  std::vector<double> q(static_cast<std::size_t>(K), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> ess(static_cast<std::size_t>(K), 0.0);
  std::vector<double> max_log_w(static_cast<std::size_t>(K), 0.0);
  std::vector<char> ok(static_cast<std::size_t>(K), 0);
  parallel_for(K, threads, [&](Index k) {
    const Vector log_w = bab_log_multipliers(family, run, outer[static_cast<std::size_t>(k)]);
    max_log_w[static_cast<std::size_t>(k)] = log_w.cwiseAbs().maxCoeff();
    Vector log_raw = base.log_raw + log_w;
    try {
      const WeightVector wk = normalize_log_weights(std::move(log_raw), prior.id, base.run_id);
      q[static_cast<std::size_t>(k)] = quantity(t, wk);
      ess[static_cast<std::size_t>(k)] = wk.ess();
      ok[static_cast<std::size_t>(k)] = 1;
    } catch (const NumericalError&) {
      ok[static_cast<std::size_t>(k)] = 0;
    }
  });

  AccuracyReport rep;
  rep.statistic = statistic_id;
  rep.quantity = quantity.label();
  rep.method = method;
  rep.count = K;
  rep.estimate = quantity(t, base);
  rep.cv_internal = internal_cv(t, base);
  for (Index k = 0; k < K; ++k) {
    const auto sk = static_cast<std::size_t>(k);
    rep.max_abs_log_w = std::max(rep.max_abs_log_w, max_log_w[sk]);
    if (!ok[sk]) {
      rep.dropped.push_back(k);
      rep.warnings.push_back("outer point " + std::to_string(k) + ": all weights underflow, dropped");
      continue;
    }
    rep.values.push_back(q[sk]);
    rep.ess.push_back(ess[sk]);
    if (ess[sk] < 0.02 * B) {
      rep.warnings.push_back("outer point " + std::to_string(k) + ": effective sample size " +
                             std::to_string(ess[sk]) + " below 0.02 B");
    }
  }
  if (static_cast<double>(rep.dropped.size()) >= 0.05 * static_cast<double>(K)) {
    throw NumericalError(method + ": weights underflow for " + std::to_string(rep.dropped.size()) +
                         " of " + std::to_string(K) + " outer points");
  }
  if (rep.values.size() < 2) throw NumericalError(method + ": fewer than two usable outer points");
  return rep;
}

double sum_sq_dev(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss;
}

}  // namespace

AccuracyReport reweighted_standard_error(const Family& family, const BootstrapRun& run,
                                         const Prior& prior, const std::string& statistic_id,
                                         const std::vector<ExpectationPoint>& outer,
                                         Quantity quantity, const std::string& method,
                                         int threads) {
  AccuracyReport rep = reweight_all(family, run, prior, statistic_id, outer, quantity, method, threads);
  rep.se = std::sqrt(sum_sq_dev(rep.values) / static_cast<double>(rep.values.size() - 1));
  return rep;
}

AccuracyReport bab_standard_error(const Family& family, const BootstrapRun& run, const Prior& prior,
                                  const std::string& statistic_id, Index K, std::uint64_t seed,
                                  Quantity quantity, int threads) {
  if (K < 2) throw ValidationError("bootstrap-after-bootstrap needs K >= 2");
  std::vector<ExpectationPoint> outer(static_cast<std::size_t>(K));
  parallel_for(K, threads, [&](Index k) {
    Rng rng = substream(seed, kOuterStreamOffset + static_cast<std::uint64_t>(k));
    outer[static_cast<std::size_t>(k)] = family.sample(run.mle, rng).beta;
  });
  return reweighted_standard_error(family, run, prior, statistic_id, outer, quantity, "bab", threads);
}

AccuracyReport jackknife_standard_error(const Family& family, const BootstrapRun& run,
                                        const Prior& prior, const std::string& statistic_id,
                                        const std::vector<ExpectationPoint>& loo_mles,
                                        Quantity quantity, int threads) {
  AccuracyReport rep =
      reweight_all(family, run, prior, statistic_id, loo_mles, quantity, "jackknife", threads);
  const double n = static_cast<double>(rep.values.size());
  rep.se = std::sqrt((n - 1.0) / n * sum_sq_dev(rep.values));
  return rep;
}

}  // namespace bootbayes
