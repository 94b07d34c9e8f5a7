#ifndef BOOTBAYES_POSTERIOR_HPP
#define BOOTBAYES_POSTERIOR_HPP

#include "bootbayes/sampler.hpp"

#include <json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bootbayes {

enum class PriorKind {
  jeffreys,          // log w_i = Delta_i; no density is evaluated
  density,           // log w_i = log pi(beta_i) + log xi_i + Delta_i
  posterior_weight,  // per-replication log(pi_i R_i) supplied directly (BCa prior)
};

/// A prior over the parameter points of a run, known up to a positive constant.
///
/// `log_constant` holds any explicit constant factor. It never enters the weights,
/// so rescaling a prior leaves every downstream number bit-identical.
struct Prior {
  std::string id;
  PriorKind kind = PriorKind::jeffreys;
  std::function<double(const BootstrapRun&, Index)> log_density;
  Vector log_values;     // log pi_i, when the prior is given per replication
  Vector log_posterior;  // log(pi_i R_i), kind == posterior_weight
  double log_constant = 0.0;

  static Prior jeffreys();
  static Prior flat();
  static Prior from_density(std::string id, std::function<double(const Replicate&)> log_pi);
  static Prior from_values(std::string id, Vector log_pi);
  /// The same prior multiplied by c > 0.
  Prior scaled(double c) const;

  double log_pi(const BootstrapRun& run, Index i) const;
};

struct WeightVector {
  Vector w;        // normalized, sums to 1
  Vector log_raw;  // unnormalized log weights
  std::string prior_id;
  std::string run_id;
  bool truncated = false;

  Index size() const { return w.size(); }
  double ess() const { return 1.0 / w.squaredNorm(); }
};

/// Max-shift normalization of log weights. Throws NumericalError on NaN or when
/// every weight underflows.
WeightVector normalize_log_weights(Vector log_raw, std::string prior_id, std::string run_id);

std::string run_id(const BootstrapRun& run);

/// pi(beta_i) R(beta_i), normalized. Expanded-proposal runs fold in their stored
/// proposal correction. With `truncate_q` the raw weights are capped at their
/// q-th quantile before normalization.
WeightVector importance_weights(const BootstrapRun& run, const Prior& prior,
                                std::optional<double> truncate_q = std::nullopt);

/// Equal weights 1/B: the plain bootstrap distribution.
WeightVector uniform_weights(const BootstrapRun& run);

double posterior_expectation(const Vector& t, const WeightVector& w);
double posterior_expectation(const BootstrapRun& run, const WeightVector& w,
                             const std::string& statistic_id);

/// Weighted quantile: sort by t, place the k-th value at cumulative weight
/// C_k - w_k/2 and interpolate linearly; clamped to the extreme values.
double weighted_quantile(const Vector& t, const Vector& w, double q);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double level = 0.95;
  bool degenerate = false;  // all t_i equal
};

Interval credible_interval(const Vector& t, const WeightVector& w, double level = 0.95);
Interval credible_interval(const BootstrapRun& run, const WeightVector& w,
                           const std::string& statistic_id, double level = 0.95);

double posterior_probability(const Vector& t, const WeightVector& w,
                             const std::function<bool(double)>& predicate);
double posterior_probability(const BootstrapRun& run, const WeightVector& w,
                             const std::string& statistic_id,
                             const std::function<bool(double)>& predicate);

/// Relative Bayesian difference (E_w t - mean t)/sd t and its factors cor(t, r) and cv(r).
struct RbdResult {
  double rbd = 0.0;
  double cor = 0.0;
  double cv = 0.0;
};
RbdResult rbd(const Vector& t, const WeightVector& w);
RbdResult rbd(const BootstrapRun& run, const WeightVector& w, const std::string& statistic_id);

struct GridSpec {
  double lo = 0.0;
  double hi = 1.0;
  int bins = 100;
};

/// Grid spanning [min t, max t] with a little padding.
GridSpec grid_covering(const Vector& t, int bins);

struct DensityCurve {
  Vector grid;  // cell centers
  Vector density;
};

/// Weighted histogram normalized to integrate to one; with `smooth` a Gaussian kernel
/// of bandwidth 1.06 sd_w(t) ESS^{-1/5} replaces the histogram.
DensityCurve weighted_density(const Vector& t, const WeightVector& w, const GridSpec& grid,
                              bool smooth = false);
DensityCurve weighted_density(const BootstrapRun& run, const WeightVector& w,
                              const std::string& statistic_id, const GridSpec& grid,
                              bool smooth = false);

/// Header `grid,density`, preceded by a `#` JSON line when `meta` is an object.
void write_density_csv(const DensityCurve& curve, const std::filesystem::path& path,
                       const nlohmann::json& meta = nullptr);

struct PredictiveDraw {
  Index index = 0;
  Vector data;
  double weight = 0.0;
};

/// Full data sets y**_i drawn from g_{beta_i} for the first `draws` replications,
/// each carrying its posterior weight w_i.
std::vector<PredictiveDraw> posterior_predictive(const BootstrapRun& run, const WeightVector& w,
                                                 const Family& family, std::uint64_t seed,
                                                 Index draws);

enum class AccelerationMethod { none, jackknife_a, family_skew_a };
std::string to_string(AccelerationMethod m);

struct BcaConstants {
  double z0 = 0.0;
  double a = 0.0;
  AccelerationMethod method = AccelerationMethod::none;
};

struct PosteriorSummary {
  std::string statistic;
  std::string prior;
  double estimate = 0.0;
  Interval ci;
  double cv_internal = 0.0;
  double ess = 0.0;
  Index B = 0;
  std::uint64_t seed = 0;
  bool truncated = false;
  std::optional<BcaConstants> bca;
};

PosteriorSummary summarize(const BootstrapRun& run, const WeightVector& w,
                           const std::string& statistic_id, double level = 0.95);

nlohmann::json to_json(const Interval& ci);
nlohmann::json to_json(const BcaConstants& c);
nlohmann::json to_json(const PosteriorSummary& s);

}  // namespace bootbayes

#endif  // BOOTBAYES_POSTERIOR_HPP
