#include "bootbayes/posterior.hpp"

#include "bootbayes/accuracy.hpp"
#include "bootbayes/numerics.hpp"
#include "bootbayes/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace bootbayes {

Prior Prior::jeffreys() {
  Prior p;
  p.id = "jeffreys";
  p.kind = PriorKind::jeffreys;
  return p;
}

Prior Prior::flat() {
  Prior p;
  p.id = "flat";
  p.kind = PriorKind::density;
  p.log_density = [](const BootstrapRun&, Index) { return 0.0; };
  return p;
}

Prior Prior::from_density(std::string id, std::function<double(const Replicate&)> log_pi) {
  Prior p;
  p.id = std::move(id);
  p.kind = PriorKind::density;
  p.log_density = [f = std::move(log_pi)](const BootstrapRun& run, Index i) {
    return f(run.replicate(i));
  };
  return p;
}

Prior Prior::from_values(std::string id, Vector log_pi) {
  Prior p;
  p.id = std::move(id);
  p.kind = PriorKind::density;
  p.log_values = std::move(log_pi);
  return p;
}

Prior Prior::scaled(double c) const {
  if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("prior scale must be positive and finite");
  Prior p = *this;
  p.log_constant += std::log(c);
  return p;
}

double Prior::log_pi(const BootstrapRun& run, Index i) const {
  if (log_values.size() > 0) return log_values(i);
  if (log_density) return log_density(run, i);
  throw ValidationError("prior '" + id + "' has no density");
}

std::string run_id(const BootstrapRun& run) {
  return run.family_id + "/seed=" + std::to_string(run.master_seed) +
         "/B=" + std::to_string(run.size());
}

WeightVector normalize_log_weights(Vector log_raw, std::string prior_id, std::string run_id) {
  double top = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < log_raw.size(); ++i) {
    if (std::isnan(log_raw(i))) throw NumericalError("weight " + std::to_string(i) + " is NaN");
    if (log_raw(i) == std::numeric_limits<double>::infinity()) {
      throw NumericalError("weight " + std::to_string(i) + " is infinite");
    }
    top = std::max(top, log_raw(i));
  }
  if (!std::isfinite(top)) throw NumericalError("all importance weights underflow");
  WeightVector out;
  out.w = (log_raw.array() - top).exp();
  out.w /= out.w.sum();
  out.log_raw = std::move(log_raw);
  out.prior_id = std::move(prior_id);
  out.run_id = std::move(run_id);
  return out;
}

WeightVector importance_weights(const BootstrapRun& run, const Prior& prior,
                                std::optional<double> truncate_q) {
  const Index B = run.size();
  Vector log_raw(B);
  switch (prior.kind) {
    case PriorKind::jeffreys:
      if (run.direct_density) {
        throw ValidationError("jeffreys weights e^Delta need an exponential-family run; '" +
                              run.family_id + "' supplies a density ratio only");
      }
      log_raw = run.delta + run.log_proposal;
      break;
    case PriorKind::density: {
      const Vector log_r = run.log_conversion();
      for (Index i = 0; i < B; ++i) {
        const double lp = prior.log_pi(run, i);
        if (std::isnan(lp) || lp == std::numeric_limits<double>::infinity()) {
          throw ValidationError("prior '" + prior.id + "' is not finite at replication " +
                                std::to_string(i));
        }
        log_raw(i) = lp + log_r(i);
      }
      break;
    }
    case PriorKind::posterior_weight:
      if (prior.log_posterior.size() != B) {
        throw ValidationError("prior '" + prior.id + "' was built for a run of a different size");
      }
      log_raw = prior.log_posterior;
      break;
  }
  bool truncated = false;
  if (truncate_q) {
    const double q = *truncate_q;
    if (!(q > 0.0 && q <= 1.0)) throw ValidationError("truncation quantile must lie in (0, 1]");
    std::vector<double> sorted(log_raw.data(), log_raw.data() + B);
    std::sort(sorted.begin(), sorted.end());
    const auto k = static_cast<std::size_t>(std::clamp<double>(std::ceil(q * B) - 1, 0, B - 1));
    const double cap = sorted[k];
    for (Index i = 0; i < B; ++i) {
      if (log_raw(i) > cap) {
        log_raw(i) = cap;
        truncated = true;
      }
    }
  }
  WeightVector out = normalize_log_weights(std::move(log_raw), prior.id, run_id(run));
  out.truncated = truncated;
  return out;
}

WeightVector uniform_weights(const BootstrapRun& run) {
  return normalize_log_weights(Vector::Zero(run.size()), "uniform", run_id(run));
}

namespace {

void check_sizes(const Vector& t, const WeightVector& w) {
  if (t.size() != w.size()) throw ValidationError("statistic and weights differ in length");
  if (t.size() == 0) throw ValidationError("empty run");
}

}  // namespace

double posterior_expectation(const Vector& t, const WeightVector& w) {
  check_sizes(t, w);
  return w.w.dot(t);
}

double posterior_expectation(const BootstrapRun& run, const WeightVector& w,
                             const std::string& statistic_id) {
  return posterior_expectation(run.stat(statistic_id), w);
}

double weighted_quantile(const Vector& t, const Vector& w, double q) {
  const Index B = t.size();
  std::vector<Index> order(static_cast<std::size_t>(B));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return t(a) < t(b); });
  const double total = w.sum();
  double cum = 0.0;
  double prev_pos = 0.0;
  double prev_t = t(order.front());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double wk = w(order[k]) / total;
    const double pos = cum + 0.5 * wk;
    cum += wk;
    const double tk = t(order[k]);
    if (k == 0) {
      if (q <= pos) return tk;
    } else if (q <= pos) {
      const double gap = pos - prev_pos;
      if (gap <= 0.0) return tk;
      return prev_t + (q - prev_pos) / gap * (tk - prev_t);
    }
    prev_pos = pos;
    prev_t = tk;
  }
  return t(order.back());
}

Interval credible_interval(const Vector& t, const WeightVector& w, double level) {
  check_sizes(t, w);
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  Interval ci;
  ci.level = level;
  ci.lo = weighted_quantile(t, w.w, 0.5 * (1.0 - level));
  ci.hi = weighted_quantile(t, w.w, 1.0 - 0.5 * (1.0 - level));
  ci.degenerate = t.minCoeff() == t.maxCoeff();
  return ci;
}

Interval credible_interval(const BootstrapRun& run, const WeightVector& w,
                           const std::string& statistic_id, double level) {
  return credible_interval(run.stat(statistic_id), w, level);
}

double posterior_probability(const Vector& t, const WeightVector& w,
                             const std::function<bool(double)>& predicate) {
  check_sizes(t, w);
  double p = 0.0;
  for (Index i = 0; i < t.size(); ++i) {
    if (predicate(t(i))) p += w.w(i);
  }
  return p;
}

double posterior_probability(const BootstrapRun& run, const WeightVector& w,
                             const std::string& statistic_id,
                             const std::function<bool(double)>& predicate) {
  return posterior_probability(run.stat(statistic_id), w, predicate);
}

RbdResult rbd(const Vector& t, const WeightVector& w) {
  check_sizes(t, w);
  const Index B = t.size();
  if (B < 2) throw ValidationError("rbd needs B >= 2");
  const Vector r = (w.log_raw.array() - w.log_raw.maxCoeff()).exp();
  const double t_bar = t.mean();
  const double r_bar = r.mean();
  const Vector dt = t.array() - t_bar;
  const Vector dr = r.array() - r_bar;
  const double sd_t = std::sqrt(dt.squaredNorm() / B);
  const double sd_r = std::sqrt(dr.squaredNorm() / B);
  if (!(sd_t > 0.0)) throw NumericalError("rbd: statistic has zero variance");
  RbdResult out;
  out.rbd = (r.dot(t) / r.sum() - t_bar) / sd_t;
  out.cv = sd_r / r_bar;
  out.cor = sd_r > 0.0 ? dt.dot(dr) / B / (sd_t * sd_r) : 0.0;
  return out;
}

RbdResult rbd(const BootstrapRun& run, const WeightVector& w, const std::string& statistic_id) {
  return rbd(run.stat(statistic_id), w);
}

GridSpec grid_covering(const Vector& t, int bins) {
  if (bins < 1) throw ValidationError("density grid needs at least one cell");
  const double lo = t.minCoeff();
  const double hi = t.maxCoeff();
  const double pad = hi > lo ? 1e-9 * (hi - lo) : 0.5;
  return {lo - pad, hi + pad, bins};
}

DensityCurve weighted_density(const Vector& t, const WeightVector& w, const GridSpec& grid,
                              bool smooth) {
  check_sizes(t, w);
  if (grid.bins < 1 || !(grid.hi > grid.lo)) throw ValidationError("empty density grid");
  const double width = (grid.hi - grid.lo) / grid.bins;
  DensityCurve out;
  out.grid.resize(grid.bins);
  for (int j = 0; j < grid.bins; ++j) out.grid(j) = grid.lo + (j + 0.5) * width;
  out.density = Vector::Zero(grid.bins);
  if (!smooth) {
    for (Index i = 0; i < t.size(); ++i) {
      const int j = static_cast<int>(std::floor((t(i) - grid.lo) / width));
      if (j >= 0 && j < grid.bins) out.density(j) += w.w(i);
      else if (t(i) == grid.hi) out.density(grid.bins - 1) += w.w(i);
    }
  } else {
    const double mean = w.w.dot(t);
    const double sd = std::sqrt(w.w.dot((t.array() - mean).square().matrix()));
    const double h = 1.06 * sd * std::pow(w.ess(), -0.2);
    if (!(h > 0.0)) throw NumericalError("kernel bandwidth is zero");
    for (int j = 0; j < grid.bins; ++j) {
      double acc = 0.0;
      for (Index i = 0; i < t.size(); ++i) acc += w.w(i) * normal_pdf((out.grid(j) - t(i)) / h);
      out.density(j) = acc;
    }
  }
  const double mass = out.density.sum() * width;
  if (!(mass > 0.0)) throw NumericalError("density grid carries no weight");
  out.density /= mass;
  return out;
}

DensityCurve weighted_density(const BootstrapRun& run, const WeightVector& w,
                              const std::string& statistic_id, const GridSpec& grid, bool smooth) {
  return weighted_density(run.stat(statistic_id), w, grid, smooth);
}

void write_density_csv(const DensityCurve& curve, const std::filesystem::path& path,
                       const nlohmann::json& meta) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path.string());
  if (meta.is_object()) out << '#' << meta.dump() << '\n';
  out << "grid,density\n";
  char buf[64];
  for (Index j = 0; j < curve.grid.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", curve.grid(j), curve.density(j));
    out << buf;
  }
}

std::vector<PredictiveDraw> posterior_predictive(const BootstrapRun& run, const WeightVector& w,
                                                 const Family& family, std::uint64_t seed,
                                                 Index draws) {
  if (!family.has_data_sampler()) {
    throw ValidationError("family '" + family.id() + "' has no full-data sampler");
  }
  if (draws < 1 || draws > run.size()) throw ValidationError("predictive draws must lie in [1, B]");
  std::vector<PredictiveDraw> out(static_cast<std::size_t>(draws));
  for (Index i = 0; i < draws; ++i) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(i));
    auto& d = out[static_cast<std::size_t>(i)];
    d.index = i;
    d.data = family.sample_data(ExpectationPoint{run.beta.row(i).transpose()}, rng);
    d.weight = w.w(i);
  }
  return out;
}

std::string to_string(AccelerationMethod m) {
  switch (m) {
    case AccelerationMethod::none: return "none";
    case AccelerationMethod::jackknife_a: return "jackknife_a";
    case AccelerationMethod::family_skew_a: return "family_skew_a";
  }
  return "none";
}

PosteriorSummary summarize(const BootstrapRun& run, const WeightVector& w,
                           const std::string& statistic_id, double level) {
  const Vector t = run.stat(statistic_id);
  PosteriorSummary s;
  s.statistic = statistic_id;
  s.prior = w.prior_id;
  s.estimate = posterior_expectation(t, w);
  s.ci = credible_interval(t, w, level);
  s.cv_internal = internal_cv(t, w);
  s.ess = w.ess();
  s.B = run.size();
  s.seed = run.master_seed;
  s.truncated = w.truncated;
  return s;
}

nlohmann::json to_json(const Interval& ci) { return nlohmann::json::array({ci.lo, ci.hi}); }

nlohmann::json to_json(const BcaConstants& c) {
  return {{"z0", c.z0}, {"a", c.a}, {"method", to_string(c.method)}, {"z0_ties", "half"}};
}

nlohmann::json to_json(const PosteriorSummary& s) {
  nlohmann::json j = {
      {"statistic", s.statistic}, {"prior", s.prior},     {"estimate", s.estimate},
      {"ci", to_json(s.ci)},      {"level", s.ci.level},  {"cv_internal", s.cv_internal},
      {"ess", s.ess},             {"B", s.B},             {"seed", s.seed},
      {"truncated", s.truncated},
  };
  if (s.ci.degenerate) j["degenerate"] = true;
  if (s.bca) j["bca"] = to_json(*s.bca);
  return j;
}

}  // namespace bootbayes
