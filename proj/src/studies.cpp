#include "bootbayes/studies.hpp"

#include "bootbayes/families.hpp"
#include "bootbayes/fisher_correlation.hpp"
#include "bootbayes/store.hpp"

#include <cmath>
#include <fstream>
#include <limits>

namespace bootbayes {

using nlohmann::json;

json provenance(const StudyOptions& o) {
  json j = {{"seed", o.seed}, {"B", o.B}, {"K", o.K}, {"version", kVersion}, {"level", o.level}};
  if (o.truncate) j["truncate"] = *o.truncate;
  return j;
}

namespace {

json pair_json(const std::pair<double, double>& p) { return json::array({p.first, p.second}); }

json rbd_json(const RbdResult& r) { return {{"rbd", r.rbd}, {"cor", r.cor}, {"cv", r.cv}}; }

PosteriorSummary with_bca(PosteriorSummary s, const BcaConstants& c) {
  s.bca = c;
  return s;
}

std::vector<NamedCurve> histograms(const Vector& t, const GridSpec& grid,
                                   const std::vector<std::pair<std::string, const WeightVector*>>& ws) {
  std::vector<NamedCurve> out;
  for (const auto& [name, w] : ws) out.push_back({name, weighted_density(t, *w, grid)});
  return out;
}

double log_weight_correlation(const WeightVector& a, const WeightVector& b) {
  const Vector x = a.log_raw.array() - a.log_raw.mean();
  const Vector y = b.log_raw.array() - b.log_raw.mean();
  const double den = std::sqrt(x.squaredNorm() * y.squaredNorm());
  return den > 0.0 ? x.dot(y) / den : 0.0;
}

double mvn_skew_acceleration(const Matrix& rows, double (*t)(const Matrix&)) {
  const MvNormalFamily family(static_cast<int>(rows.cols()), static_cast<int>(rows.rows()));
  const MlePoint mle = family.mle_point(family.to_beta(mvn_mle(rows)));
  return family_skew_acceleration(family, mle, [&](const ExpectationPoint& b) {
    return t(family.to_params(b).sigma);
  });
}

json acceleration_json(double jack, double skew, const BcaConstants& c) {
  return {{"jackknife_a", jack}, {"family_skew_a", skew}, {"default", to_string(c.method)}};
}

void check_options(const StudyOptions& o) {
  if (o.B < 1) throw ValidationError("B must be at least 1");
  if (o.K < 0 || o.K == 1) throw ValidationError("K must be 0 (skip) or at least 2");
  if (!(o.level > 0.0 && o.level < 1.0)) throw ValidationError("level must lie in (0, 1)");
}

}  // namespace

// ---------------------------------------------------------------------------

json CorrelationStudy::to_json() const {
  json j = provenance(options);
  j["study"] = "correlation";
  j["n"] = n;
  j["theta_hat"] = theta_hat;
  j["exact_ci"] = pair_json(exact_ci);
  j["jeffreys_ci"] = bootbayes::to_json(jeffreys.ci);
  j["bca_ci"] = bootbayes::to_json(bca.ci);
  j["rbd"] = rbd_json(rbd);
  j["acceleration"] = acceleration_json(a_jackknife, a_family_skew, constants);
  j["summaries"] = {{"bootstrap", bootbayes::to_json(bootstrap)},
                    {"jeffreys", bootbayes::to_json(jeffreys)},
                    {"bca", bootbayes::to_json(bca)}};
  json acc = json::object();
  if (bab) acc["bab"] = bootbayes::to_json(*bab);
  if (jackknife) acc["jackknife"] = bootbayes::to_json(*jackknife);
  j["accuracy"] = acc;
  return j;
}

CorrelationStudy study_correlation(const StudyOptions& options, const ScoresDataset& data) {
  check_options(options);
  CorrelationStudy s;
  s.options = options;
  const Matrix& rows = data.rows;
  s.n = rows.rows();
  const int n = static_cast<int>(s.n);
  auto correlation_of = [](const Matrix& m) { return statistic_correlation(mvn_mle(m).sigma); };
  s.theta_hat = correlation_of(rows);
  s.exact_ci = fisher_exact_ci(s.theta_hat, n, options.level);

  const FisherCorrelationFamily family(n);
  const MlePoint mle = family.mle_point({Vector::Constant(1, s.theta_hat)});
  const Statistic corr{"correlation", [](const Replicate& r) { return r.beta.beta(0); }};
  s.run = run_bootstrap(family, mle, options.B, options.seed, {corr}, options.threads);

  const Prior prior = Prior::from_density("jeffreys_correlation", [](const Replicate& r) {
    return std::log(prior_jeffreys_correlation(r.beta.beta(0)));
  });
  const WeightVector w = importance_weights(s.run, prior, options.truncate);
  const WeightVector u = uniform_weights(s.run);
  s.bootstrap = summarize(s.run, u, "correlation", options.level);
  s.jeffreys = summarize(s.run, w, "correlation", options.level);

  const Vector loo = leave_one_out(rows, correlation_of);
  s.a_jackknife = jackknife_acceleration(loo);
  s.a_family_skew = mvn_skew_acceleration(rows, [](const Matrix& sigma) {
    return statistic_correlation(sigma);
  });
  s.constants = {z0_estimate(s.run, "correlation", s.theta_hat), s.a_family_skew,
                 AccelerationMethod::family_skew_a};
  const WeightVector wb = bca_weights(s.run, "correlation", s.constants);
  s.bca = with_bca(summarize(s.run, wb, "correlation", options.level), s.constants);
  s.rbd = rbd(s.run, w, "correlation");

  if (options.K > 0) {
    s.bab = bab_standard_error(family, s.run, prior, "correlation", options.K, options.seed,
                               Quantity::mean(), options.threads);
    std::vector<ExpectationPoint> loo_points;
    for (Index k = 0; k < loo.size(); ++k) loo_points.push_back({Vector::Constant(1, loo(k))});
    s.jackknife = jackknife_standard_error(family, s.run, prior, "correlation", loo_points,
                                           Quantity::mean(), options.threads);
  }

  const Vector t = s.run.stat("correlation");
  const GridSpec grid = grid_covering(t, options.density_bins);
  s.curves = histograms(t, grid, {{"bootstrap", &u}, {"jeffreys", &w}, {"bca", &wb}});
  DensityCurve exact{s.curves.front().curve.grid, Vector(grid.bins)};
  for (int j = 0; j < grid.bins; ++j) exact.density(j) = fisher_density(s.theta_hat, exact.grid(j), n);
  s.curves.push_back({"fisher_density", exact});
  return s;
}

// ---------------------------------------------------------------------------

json EigenratioStudy::to_json() const {
  json j = provenance(options);
  j["study"] = "eigenratio";
  j["theta_hat"] = theta_hat;
  j["jeffreys_ci"] = bootbayes::to_json(jeffreys.ci);
  j["bca_ci"] = bootbayes::to_json(bca.ci);
  j["inverse_wishart_ci"] = bootbayes::to_json(inverse_wishart.ci);
  j["bca_jeffreys_log_weight_cor"] = bca_jeffreys_cor;
  j["acceleration"] = acceleration_json(a_jackknife, a_family_skew, constants);
  j["summaries"] = {{"bootstrap", bootbayes::to_json(bootstrap)},
                    {"jeffreys", bootbayes::to_json(jeffreys)},
                    {"bca", bootbayes::to_json(bca)},
                    {"inverse_wishart", bootbayes::to_json(inverse_wishart)}};
  json acc = json::object();
  if (bab) acc["bab"] = bootbayes::to_json(*bab);
  j["accuracy"] = acc;
  return j;
}

EigenratioStudy study_eigenratio(const StudyOptions& options, const ScoresDataset& data) {
  check_options(options);
  EigenratioStudy s;
  s.options = options;
  const Matrix& rows = data.rows;
  s.gamma_hat = mvn_mle(rows);
  s.theta_hat = statistic_eigenratio(s.gamma_hat.sigma);

  const MvNormalFamily family(2, static_cast<int>(rows.rows()));
  const MlePoint mle = family.mle_point(family.to_beta(s.gamma_hat));
  const Statistic eigen{"eigenratio", [&family](const Replicate& r) {
                          return statistic_eigenratio(family.to_params(r.beta).sigma);
                        }};
  const Statistic corr{"correlation", [&family](const Replicate& r) {
                         return statistic_correlation(family.to_params(r.beta).sigma);
                       }};
  s.run = run_bootstrap(family, mle, options.B, options.seed, {eigen, corr}, options.threads);

  const WeightVector w = importance_weights(s.run, Prior::jeffreys(), options.truncate);
  const WeightVector u = uniform_weights(s.run);
  s.bootstrap = summarize(s.run, u, "eigenratio", options.level);
  s.jeffreys = summarize(s.run, w, "eigenratio", options.level);

  const Vector loo = leave_one_out(
      rows, [](const Matrix& m) { return statistic_eigenratio(mvn_mle(m).sigma); });
  s.a_jackknife = jackknife_acceleration(loo);
  s.a_family_skew = mvn_skew_acceleration(rows, [](const Matrix& sigma) {
    return statistic_eigenratio(sigma);
  });
  s.constants = {z0_estimate(s.run, "eigenratio", s.theta_hat), s.a_family_skew,
                 AccelerationMethod::family_skew_a};
  const WeightVector wb = bca_weights(s.run, "eigenratio", s.constants);
  s.bca = with_bca(summarize(s.run, wb, "eigenratio", options.level), s.constants);
  s.bca_jeffreys_cor = log_weight_correlation(wb, w);

  const Matrix scale = Matrix::Identity(2, 2);
  const Prior iw = Prior::from_density("inverse_wishart", [&family, &scale](const Replicate& r) {
    return prior_inverse_wishart_log(family.to_params(r.beta).sigma, scale, 2.0);
  });
  const WeightVector wi = importance_weights(s.run, iw, options.truncate);
  s.inverse_wishart = summarize(s.run, wi, "eigenratio", options.level);

  if (options.K > 0) {
    s.bab = bab_standard_error(family, s.run, Prior::jeffreys(), "eigenratio", options.K,
                               options.seed, Quantity::mean(), options.threads);
  }

  const Vector t = s.run.stat("eigenratio");
  const GridSpec grid = grid_covering(t, options.density_bins);
  s.curves = histograms(t, grid, {{"bootstrap", &u}, {"jeffreys", &w}, {"bca", &wb}});
  return s;
}

// ---------------------------------------------------------------------------

int aic_selected_degree(const std::vector<PoissonGlmFamily>& nested, const Vector& beta) {
  int best = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (const auto& family : nested) {
    const Index p = family.dimension();
    const Vector b = beta.head(p);
    const CanonicalPoint a = family.canonical({b});
    // AIC up to the sum of y log y - y, which every model shares.
    const double score = -2.0 * (a.alpha.dot(b) - family.mu(a).sum()) + 2.0 * static_cast<double>(p);
    if (score < best_score) {
      best_score = score;
      best = static_cast<int>(p) - 1;
    }
  }
  return best;
}

int aic_selected_degree(const Matrix& x8, const Vector& counts) {
  int best = 0;
  double best_aic = std::numeric_limits<double>::infinity();
  for (int m = kMinDegree; m <= kMaxDegree; ++m) {
    const double value = aic(glm_fit(x8.leftCols(m + 1), counts).deviance, m);
    if (value < best_aic) {
      best_aic = value;
      best = m;
    }
  }
  return best;
}

json ProstateStudy::to_json() const {
  json j = provenance(options);
  j["study"] = "prostate";
  j["N"] = N;
  j["out_of_range"] = bins.out_of_range;
  j["aic_best"] = aic_best;
  j["fdr3_m4"] = fdr_m4;
  j["fdr3_m8"] = fdr_m8;
  j["m4_jeffreys_ci"] = bootbayes::to_json(m4_jeffreys.ci);
  j["m4_bca_ci"] = bootbayes::to_json(m4_bca.ci);
  j["m8_jeffreys_ci"] = bootbayes::to_json(m8_jeffreys.ci);
  json table_json = json::array();
  for (const auto& r : table) {
    table_json.push_back({{"model", "M" + std::to_string(r.degree)},
                          {"deviance", r.deviance},
                          {"aic", r.aic},
                          {"boot", r.boot},
                          {"bayes", r.bayes},
                          {"se", r.se},
                          {"nonparametric", r.nonparametric}});
  }
  j["table"] = table_json;
  j["summaries"] = {{"m4_bootstrap", bootbayes::to_json(m4_bootstrap)},
                    {"m4_jeffreys", bootbayes::to_json(m4_jeffreys)},
                    {"m4_bca", bootbayes::to_json(m4_bca)},
                    {"m8_jeffreys", bootbayes::to_json(m8_jeffreys)}};
  json acc = json::array();
  for (const auto& r : selection_bab) acc.push_back(bootbayes::to_json(r));
  j["accuracy"] = acc;
  return j;
}

ProstateStudy study_prostate(const ZValueDataset& z, const StudyOptions& options,
                             const BinSpec& spec) {
  check_options(options);
  ProstateStudy s;
  s.options = options;
  s.N = z.z.size();
  s.bins = bin_zvalues(z.z, spec);
  const Vector& y = s.bins.counts;
  const Vector& x = s.bins.centers;
  if (y.sum() <= 0.0) throw ValidationError("no z-values fall inside the bins");
  const Matrix x8 = poly_basis(x, kMaxDegree);

  double best_aic = std::numeric_limits<double>::infinity();
  for (int m = kMinDegree; m <= kMaxDegree; ++m) {
    ModelRow row;
    row.degree = m;
    row.deviance = glm_fit(x8.leftCols(m + 1), y).deviance;
    row.aic = aic(row.deviance, m);
    if (row.aic < best_aic) {
      best_aic = row.aic;
      s.aic_best = m;
    }
    s.table.push_back(row);
  }

  constexpr double kZ = 3.0;
  // M4 bootstrap for the Fdr(3) posterior.
  const PoissonGlmFamily f4(x8.leftCols(5));
  const MlePoint mle4 = f4.mle_point({f4.design().transpose() * y});
  s.fdr_m4 = statistic_fdr(f4.mu(mle4.alpha_hat), kZ, x);
  const Statistic fdr4{"fdr3", [&f4, &x](const Replicate& r) {
                         return statistic_fdr(f4.mu(r.alpha), kZ, x);
                       }};
  s.run_m4 = run_bootstrap(f4, mle4, options.B, options.seed, {fdr4}, options.threads);
  const WeightVector u4 = uniform_weights(s.run_m4);
  const WeightVector w4 = importance_weights(s.run_m4, Prior::jeffreys(), options.truncate);
  s.m4_bootstrap = summarize(s.run_m4, u4, "fdr3", options.level);
  s.m4_jeffreys = summarize(s.run_m4, w4, "fdr3", options.level);
  s.m4_constants.z0 = z0_estimate(s.run_m4, "fdr3", s.fdr_m4);
  s.m4_constants.a = family_skew_acceleration(f4, mle4, [&f4, &x](const ExpectationPoint& b) {
    return statistic_fdr(f4.mu(f4.canonical(b)), kZ, x);
  });
  s.m4_constants.method = AccelerationMethod::family_skew_a;
  const WeightVector wb4 = bca_weights(s.run_m4, "fdr3", s.m4_constants);
  s.m4_bca = with_bca(summarize(s.run_m4, wb4, "fdr3", options.level), s.m4_constants);

  // M8 bootstrap: Fdr(3) and AIC model selection per replication.
  const PoissonGlmFamily f8(x8);
  const MlePoint mle8 = f8.mle_point({x8.transpose() * y});
  s.fdr_m8 = statistic_fdr(f8.mu(mle8.alpha_hat), kZ, x);
  std::vector<PoissonGlmFamily> nested;
  for (int m = kMinDegree; m <= kMaxDegree; ++m) nested.emplace_back(x8.leftCols(m + 1));
  const Statistic fdr8{"fdr3", [&f8, &x](const Replicate& r) {
                         return statistic_fdr(f8.mu(r.alpha), kZ, x);
                       }};
  const Statistic degree{"aic_degree", [&nested](const Replicate& r) {
                           return static_cast<double>(aic_selected_degree(nested, r.beta.beta));
                         }};
  const std::uint64_t seed8 = options.seed + 1;
  s.run_m8 = run_bootstrap(f8, mle8, options.B, seed8, {fdr8, degree}, options.threads);
  const Vector chosen = s.run_m8.stat("aic_degree");
  const Index base_cols = s.run_m8.stats.cols();
  s.run_m8.stats.conservativeResize(Eigen::NoChange, base_cols + (kMaxDegree - kMinDegree + 1));
  for (int m = kMinDegree; m <= kMaxDegree; ++m) {
    s.run_m8.stat_ids.push_back("sel_m" + std::to_string(m));
    s.run_m8.stats.col(base_cols + m - kMinDegree) = (chosen.array() == m).cast<double>();
  }
  const WeightVector u8 = uniform_weights(s.run_m8);
  const WeightVector w8 = importance_weights(s.run_m8, Prior::jeffreys(), options.truncate);
  s.m8_jeffreys = summarize(s.run_m8, w8, "fdr3", options.level);
  for (int m = kMinDegree; m <= kMaxDegree; ++m) {
    const std::string id = "sel_m" + std::to_string(m);
    ModelRow& row = s.table[static_cast<std::size_t>(m - kMinDegree)];
    row.boot = posterior_expectation(s.run_m8, u8, id);
    row.bayes = posterior_expectation(s.run_m8, w8, id);
    if (options.K > 0) {
      s.selection_bab.push_back(bab_standard_error(f8, s.run_m8, Prior::jeffreys(), id, options.K,
                                                   seed8, Quantity::mean(), options.threads));
      row.se = s.selection_bab.back().se;
    }
  }

  // Nonparametric comparison: resample the z-values themselves.
  const std::vector<Vector> resampled = nonparametric_resample(z.z, options.B, options.seed + 2, spec);
  std::vector<int> picks(resampled.size());
  parallel_for(static_cast<Index>(resampled.size()), options.threads, [&](Index b) {
    picks[static_cast<std::size_t>(b)] = aic_selected_degree(x8, resampled[static_cast<std::size_t>(b)]);
  });
  for (int pick : picks) s.table[static_cast<std::size_t>(pick - kMinDegree)].nonparametric += 1.0;
  for (auto& row : s.table) row.nonparametric /= static_cast<double>(picks.size());

  const Vector t4 = s.run_m4.stat("fdr3");
  const Vector t8 = s.run_m8.stat("fdr3");
  Vector both(t4.size() + t8.size());
  both << t4, t8;
  const GridSpec grid = grid_covering(both, options.density_bins);
  s.curves = histograms(t4, grid, {{"m4_bootstrap", &u4}, {"m4_jeffreys", &w4}, {"m4_bca", &wb4}});
  for (auto& c : histograms(t8, grid, {{"m8_bootstrap", &u8}, {"m8_jeffreys", &w8}})) {
    s.curves.push_back(std::move(c));
  }
  return s;
}

// ---------------------------------------------------------------------------

void write_outputs(const std::filesystem::path& dir, const json& report,
                   const std::vector<NamedCurve>& curves,
                   const std::vector<std::pair<std::string, const BootstrapRun*>>& stores) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "report.json");
    if (!out) throw ValidationError("cannot write " + (dir / "report.json").string());
    out << report.dump(2) << '\n';
  }
  json meta = json::object();
  for (const char* key : {"seed", "B", "K", "version"}) {
    if (report.contains(key)) meta[key] = report[key];
  }
  for (const auto& c : curves) write_density_csv(c.curve, dir / ("density_" + c.name + ".csv"), meta);
  const Index K = report.value("K", Index{0});
  for (const auto& [name, run] : stores) write_store(*run, dir / ("store_" + name + ".csv"), K);
}

}  // namespace bootbayes
