#include "bootbayes/accuracy.hpp"
#include "bootbayes/families.hpp"
#include "bootbayes/fisher_correlation.hpp"
#include "bootbayes/poisson_glm.hpp"
#include "bootbayes/studies.hpp"

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>

using namespace bootbayes;

namespace {

ExpectationPoint scalar(double b) { return {Vector::Constant(1, b)}; }

const Statistic kConst{"const", [](const Replicate&) { return 1.0; }};

BootstrapRun gamma_run(int n, Index B, std::uint64_t seed) {
  GammaScaleFamily fam(n);
  return run_bootstrap(fam, fam.mle_point(scalar(1.0)), B, seed, {coordinate_statistic(0), kConst});
}

}  // namespace

TEST_CASE("internal cv: zero for constant inputs, B^-1/2 scaling") {
  CHECK(internal_cv(Vector::Constant(50, 2.0), normalize_log_weights(Vector::Zero(50), "u", "r")) == 0.0);

  GammaScaleFamily fam(10);
  std::vector<double> scaled;
  for (Index B : {1000, 4000, 16000}) {
    const BootstrapRun run = run_bootstrap(fam, fam.mle_point(scalar(1.0)), B, 31, {coordinate_statistic(0)});
    scaled.push_back(internal_cv(run, importance_weights(run, Prior::jeffreys()), "beta_1") *
                     std::sqrt(static_cast<double>(B)));
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  CHECK(*hi / *lo < 1.2);
}

TEST_CASE("internal cv tracks the spread of the estimate over seeds") {
  // small n makes e^Delta heavy tailed enough that the delta method misses rare outliers
  GammaScaleFamily fam(100);
  const MlePoint mle = fam.mle_point(scalar(1.0));
  Vector est(50), cv(50);
  for (int s = 0; s < 50; ++s) {
    const BootstrapRun run = run_bootstrap(fam, mle, 2000, 1000 + s, {coordinate_statistic(0)});
    const WeightVector w = importance_weights(run, Prior::jeffreys());
    est(s) = posterior_expectation(run, w, "beta_1");
    cv(s) = internal_cv(run, w, "beta_1");
  }
  const double m = est.mean();
  const double emp = std::sqrt((est.array() - m).square().sum() / 49.0) / m;
  const double ratio = cv.mean() / emp;
  CHECK(ratio >= 0.7);
  CHECK(ratio <= 1.4);
}

TEST_CASE("reweighting at beta_hat reproduces the estimate exactly") {
  const BootstrapRun run = gamma_run(10, 2000, 32);
  GammaScaleFamily fam(10);
  const std::vector<ExpectationPoint> outer(3, run.mle.beta_hat);
  const AccuracyReport r = reweighted_standard_error(fam, run, Prior::jeffreys(), "beta_1", outer,
                                                     Quantity::mean(), "bab");
  for (double q : r.values) CHECK(q == r.estimate);
  CHECK(r.se == 0.0);
  CHECK(r.max_abs_log_w == 0.0);
  CHECK((bab_log_multipliers(fam, run, run.mle.beta_hat).array() == 0.0).all());

  // quantiles reweight the same way
  const AccuracyReport rq = reweighted_standard_error(fam, run, Prior::jeffreys(), "beta_1", outer,
                                                      Quantity::quantile(0.975), "bab");
  CHECK(rq.values.front() == weighted_quantile(run.stat("beta_1"), importance_weights(run, Prior::jeffreys()).w, 0.975));
  CHECK(rq.quantity == "quantile(0.975)");

  // density-ratio families too
  FisherCorrelationFamily fisher(22);
  const BootstrapRun fr = run_bootstrap(fisher, fisher.mle_point(scalar(0.5)), 300, 3, {coordinate_statistic(0)});
  CHECK((bab_log_multipliers(fisher, fr, fr.mle.beta_hat).array() == 0.0).all());
}

TEST_CASE("bab: constant statistic has zero se; order of outer points is irrelevant") {
  const BootstrapRun run = gamma_run(10, 2000, 33);
  GammaScaleFamily fam(10);
  const AccuracyReport c = bab_standard_error(fam, run, Prior::jeffreys(), "const", 20, 5);
  CHECK(c.se == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(c.count == 20);

  std::vector<ExpectationPoint> outer;
  for (int k = 0; k < 15; ++k) outer.push_back(scalar(0.8 + 0.03 * k));
  const AccuracyReport a = reweighted_standard_error(fam, run, Prior::jeffreys(), "beta_1", outer, Quantity::mean(), "bab");
  std::reverse(outer.begin(), outer.end());
  const AccuracyReport b = reweighted_standard_error(fam, run, Prior::jeffreys(), "beta_1", outer, Quantity::mean(), "bab");
  CHECK(a.se == doctest::Approx(b.se).epsilon(1e-12));
  CHECK(a.se > 0.0);

  const AccuracyReport same = reweighted_standard_error(fam, run, Prior::jeffreys(), "beta_1",
                                                        std::vector<ExpectationPoint>(4, scalar(1.1)),
                                                        Quantity::mean(), "jackknife");
  CHECK(same.se == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));

  // deterministic, thread independent
  const AccuracyReport t1 = bab_standard_error(fam, run, Prior::jeffreys(), "beta_1", 30, 9, Quantity::mean(), 1);
  const AccuracyReport t4 = bab_standard_error(fam, run, Prior::jeffreys(), "beta_1", 30, 9, Quantity::mean(), 4);
  CHECK(t1.values == t4.values);
  CHECK(t1.se == t4.se);
  CHECK_THROWS_AS(bab_standard_error(fam, run, Prior::jeffreys(), "beta_1", 1, 9), ValidationError);
}

TEST_CASE("bab flags outer points whose weights collapse") {
  const BootstrapRun run = gamma_run(50, 1000, 34);
  GammaScaleFamily fam(50);
  const std::vector<ExpectationPoint> outer{scalar(1.0), scalar(3.0)};
  const AccuracyReport r = reweighted_standard_error(fam, run, Prior::jeffreys(), "beta_1", outer, Quantity::mean(), "bab");
  REQUIRE(r.ess.size() == 2);
  CHECK(r.ess[1] < 0.02 * 1000);
  CHECK_FALSE(r.warnings.empty());
  const auto j = to_json(r);
  CHECK(j["q_k"].size() == 2);
  CHECK(j.contains("warnings"));
}

TEST_CASE("poisson glm multipliers match the count likelihoods") {
  const Vector x = Vector::LinSpaced(12, -2.0, 2.0);
  const Matrix design = poly_basis(x, 2);
  PoissonGlmFamily fam(design);
  Vector y(12);
  for (Index j = 0; j < 12; ++j) y(j) = std::round(20.0 * std::exp(-0.3 * x(j) * x(j)));
  const GlmFit fit = glm_fit(design, y);
  const MlePoint mle = fam.mle_point({design.transpose() * y});
  const BootstrapRun run = run_bootstrap(fam, mle, 400, 35, {coordinate_statistic(0)});
  Rng rng = substream(77, 0);
  const Vector yk = glm_sample(fit.mu, rng);
  const ExpectationPoint gamma{design.transpose() * yk};
  const Vector lw = bab_log_multipliers(fam, run, gamma);
  Vector diff(run.size());
  for (Index i = 0; i < run.size(); ++i) {
    const Vector mu = fam.mu({run.alpha.row(i).transpose()});
    double l = 0.0;
    for (Index j = 0; j < 12; ++j) {
      l += (yk(j) - y(j)) * std::log(mu(j)) - std::lgamma(yk(j) + 1.0) + std::lgamma(y(j) + 1.0);
    }
    diff(i) = l - lw(i);
  }
  CHECK(diff.maxCoeff() - diff.minCoeff() < 1e-8);
}

TEST_CASE("correlation study: jackknife and bab agree, jackknife multipliers are closer to 1") {
  StudyOptions o;
  o.B = 2000;
  o.K = 40;
  o.threads = 4;
  const auto t0 = std::chrono::steady_clock::now();
  const CorrelationStudy s = study_correlation(o);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("correlation study, B=2000 K=40 plus 22 jackknife points: " << secs << " s");
  REQUIRE(s.bab);
  REQUIRE(s.jackknife);
  CHECK(s.jackknife->count == 22);
  const double ratio = s.jackknife->se / s.bab->se;
  CHECK(ratio > 0.5);
  CHECK(ratio < 2.0);
  CHECK(s.jackknife->max_abs_log_w < s.bab->max_abs_log_w);
}

TEST_CASE("internal cv of an estimate that is exactly zero is NaN") {
  CHECK(std::isnan(internal_cv(Vector::Zero(10), normalize_log_weights(Vector::Zero(10), "u", "r"))));
}
