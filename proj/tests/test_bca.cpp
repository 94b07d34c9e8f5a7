#include "bootbayes/bca.hpp"
#include "bootbayes/families.hpp"
#include "bootbayes/mvnormal.hpp"
#include "bootbayes/numerics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace bootbayes;

namespace {

ExpectationPoint scalar(double b) { return {Vector::Constant(1, b)}; }

BootstrapRun gamma_run(int n, Index B, std::uint64_t seed) {
  GammaScaleFamily fam(n);
  return run_bootstrap(fam, fam.mle_point(scalar(1.0)), B, seed, {coordinate_statistic(0)});
}

// textbook BCa endpoint: empirical quantile of t at Phi(z0 + (z0 + z)/(1 - a(z0 + z)))
double bca_percentile(Vector t, double z0, double a, double alpha) {
  std::sort(t.data(), t.data() + t.size());
  const double zz = z0 + normal_quantile(alpha);
  const double p = normal_cdf(z0 + zz / (1.0 - a * zz));
  const double pos = p * static_cast<double>(t.size()) - 0.5;
  const auto k = static_cast<Index>(std::clamp(std::floor(pos), 0.0, static_cast<double>(t.size() - 2)));
  const double f = std::clamp(pos - static_cast<double>(k), 0.0, 1.0);
  return (1.0 - f) * t(k) + f * t(k + 1);
}

}  // namespace

TEST_CASE("z0 from the proportion below theta_hat") {
  const Vector t = Vector::LinSpaced(100, 1.0, 100.0);
  CHECK(z0_estimate(t, 50.5) == doctest::Approx(0.0).scale(1.0));
  // ties at theta_hat count half: 49 below + 1 tie -> 0.495
  CHECK(z0_estimate(t, 50.0) == doctest::Approx(normal_quantile(0.495)).epsilon(1e-12));
  // more than half above theta_hat -> negative
  CHECK(z0_estimate(t, 30.2) < 0.0);
  CHECK(z0_estimate(t, 80.2) > 0.0);
  CHECK_THROWS_AS(z0_estimate(t, 0.5), NumericalError);
  CHECK_THROWS_AS(z0_estimate(t, 100.5), NumericalError);
}

TEST_CASE("bca weights with zero constants are uniform") {
  const BootstrapRun run = gamma_run(10, 2000, 1);
  const WeightVector w = bca_weights(run, "beta_1", {0.0, 0.0, AccelerationMethod::none});
  CHECK((w.w.array() - 1.0 / 2000.0).abs().maxCoeff() < 1e-12);
  const Interval ci = bca_interval(run, "beta_1", {}, 0.95);
  const Interval plain = credible_interval(run, uniform_weights(run), "beta_1");
  CHECK(ci.lo == doctest::Approx(plain.lo).epsilon(1e-12));
  CHECK(ci.hi == doctest::Approx(plain.hi).epsilon(1e-12));
}

TEST_CASE("bca weights match the textbook BCa percentiles") {
  const BootstrapRun run = gamma_run(10, 20000, 2);
  const Vector t = run.stat("beta_1");
  for (const auto& [z0, a] : std::vector<std::pair<double, double>>{{-0.2, 0.0}, {0.1, 0.05}, {-0.07, -0.03}}) {
    const Interval ci = bca_interval(run, "beta_1", {z0, a, AccelerationMethod::none});
    CHECK(ci.lo == doctest::Approx(bca_percentile(t, z0, a, 0.025)).epsilon(0.01));
    CHECK(ci.hi == doctest::Approx(bca_percentile(t, z0, a, 0.975)).epsilon(0.01));
  }
}

TEST_CASE("negative z0 and zero a give weights decreasing in rank") {
  const BootstrapRun run = gamma_run(10, 3000, 3);
  const Vector t = run.stat("beta_1");
  const WeightVector w = bca_weights(t, {-0.222, 0.0, AccelerationMethod::none});
  std::vector<Index> order(static_cast<std::size_t>(t.size()));
  for (Index i = 0; i < t.size(); ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return t(a) < t(b); });
  bool decreasing = true;
  for (std::size_t k = 1; k < order.size(); ++k) decreasing = decreasing && w.w(order[k]) < w.w(order[k - 1]);
  CHECK(decreasing);
}

TEST_CASE("bca is invariant under monotone maps of t") {
  const BootstrapRun run = gamma_run(10, 5000, 4);
  const Vector t = run.stat("beta_1");
  const Vector ft = t.array().log();
  const BcaConstants c{-0.15, 0.04, AccelerationMethod::none};
  const WeightVector w = bca_weights(t, c);
  const WeightVector wf = bca_weights(ft, c);
  CHECK(w.w == wf.w);
  // endpoints fall between the images of the same order statistics
  Vector s = t, sf = ft;
  std::sort(s.data(), s.data() + s.size());
  std::sort(sf.data(), sf.data() + sf.size());
  const Interval ci = credible_interval(t, w), cf = credible_interval(ft, wf);
  const auto k = std::upper_bound(s.data(), s.data() + s.size(), ci.lo) - s.data();
  CHECK(cf.lo >= sf(k - 1));
  CHECK(cf.lo <= sf(k));
  CHECK(std::log(ci.lo) == doctest::Approx(cf.lo).epsilon(1e-4));
  CHECK(std::log(ci.hi) == doctest::Approx(cf.hi).epsilon(1e-4));
  CHECK(z0_estimate(t, 1.0) == z0_estimate(ft, 0.0));
}

TEST_CASE("bca weights with undefined 1 + a z") {
  const Vector t = Vector::LinSpaced(1000, 0.0, 1.0);
  CHECK_THROWS_AS(bca_weights(t, {0.0, 0.5, AccelerationMethod::none}), NumericalError);
}

TEST_CASE("bca prior round trip is exact") {
  MvNormalFamily fam(2, 22);
  const MlePoint mle = fam.mle_point(fam.to_beta(mvn_mle(embedded_scores().rows)));
  const Statistic er{"eigenratio", [&](const Replicate& r) { return statistic_eigenratio(fam.to_params(r.beta).sigma); }};
  const BootstrapRun run = run_bootstrap(fam, mle, 2000, 5, {er});
  const BcaConstants c{-0.222, 0.01, AccelerationMethod::none};
  const Prior p = bca_prior(run, "eigenratio", c);
  CHECK(importance_weights(run, p).w == bca_weights(run, "eigenratio", c).w);
  CHECK(((p.log_values + run.log_conversion()) - p.log_posterior).cwiseAbs().maxCoeff() < 1e-12);
  // the implied prior is not Jeffreys
  const Vector lj = run.delta;
  const Vector lb = importance_weights(run, p).log_raw;
  const double cor = ((lj.array() - lj.mean()) * (lb.array() - lb.mean())).sum() /
                     std::sqrt((lj.array() - lj.mean()).square().sum() * (lb.array() - lb.mean()).square().sum());
  CHECK(cor < 0.9);
}

TEST_CASE("zero bca constants on a normal translation family give a constant prior") {
  NormalTranslationFamily fam(Matrix::Identity(1, 1));
  const BootstrapRun run = run_bootstrap(fam, fam.mle_point(scalar(0.0)), 500, 6, {coordinate_statistic(0)});
  const Prior p = bca_prior(run, "beta_1", {});
  CHECK(p.log_values.maxCoeff() - p.log_values.minCoeff() < 1e-12);
}

TEST_CASE("jackknife acceleration") {
  // symmetric sample, mean statistic: all third moments cancel
  Matrix rows(21, 1);
  for (int i = 0; i < 21; ++i) rows(i, 0) = i - 10.0;
  const Vector loo = leave_one_out(rows, [](const Matrix& m) { return m.mean(); });
  CHECK(std::abs(jackknife_acceleration(loo)) < 1e-12);
  // hand value: loo = (0, 0, 3) -> d = (1, 1, -2), a = (1 + 1 - 8) / (6 * 6^1.5)
  CHECK(jackknife_acceleration(Vector{{0.0, 0.0, 3.0}}) == doctest::Approx(-6.0 / (6.0 * std::pow(6.0, 1.5))));
  CHECK_THROWS_AS(jackknife_acceleration(Vector::Constant(5, 1.0)), NumericalError);
  CHECK_THROWS_AS(leave_one_out(Matrix::Ones(1, 2), [](const Matrix&) { return 0.0; }), ValidationError);
}

TEST_CASE("family skew acceleration") {
  // gamma, t = beta: skewness 2/sqrt(n)
  const int n = 16;
  GammaScaleFamily fam(n);
  const MlePoint mle = fam.mle_point(scalar(1.5));
  const double a = family_skew_acceleration(fam, mle, [](const ExpectationPoint& b) { return b.beta(0); });
  CHECK(a == doctest::Approx(2.0 / std::sqrt(n) / 6.0).epsilon(1e-6));
  // increasing transforms of a one-parameter statistic share the direction
  const double a2 = family_skew_acceleration(fam, mle, [](const ExpectationPoint& b) { return std::log(b.beta(0)); });
  CHECK(a2 == doctest::Approx(a).epsilon(1e-6));
  // normal translation: zero skewness
  NormalTranslationFamily nt(Matrix::Identity(2, 2));
  const double a0 = family_skew_acceleration(nt, nt.mle_point({Vector{{1.0, 2.0}}}),
                                             [](const ExpectationPoint& b) { return b.beta(0) * b.beta(1); });
  CHECK(std::abs(a0) < 1e-12);

  // mvn: against a Monte Carlo estimate of the skewness of grad t . beta_hat
  MvNormalFamily mvn(2, 10);
  Matrix s(2, 2);
  s << 2.0, 0.5, 0.5, 1.0;
  const MlePoint mm = mvn.mle_point(mvn.to_beta({Vector{{1.0, 0.0}}, s}));
  const auto var11 = [&](const ExpectationPoint& b) { return mvn.to_params(b).sigma(0, 0); };
  const double am = family_skew_acceleration(mvn, mm, var11);
  Vector grad(5);
  for (int j = 0; j < 5; ++j) {
    ExpectationPoint up = mm.beta_hat, dn = mm.beta_hat;
    up.beta(j) += 1e-6;
    dn.beta(j) -= 1e-6;
    grad(j) = (var11(up) - var11(dn)) / 2e-6;
  }
  const int reps = 200000;
  Vector x(reps);
  for (int i = 0; i < reps; ++i) {
    Rng rng = substream(21, static_cast<std::uint64_t>(i));
    x(i) = grad.dot(mvn.sample(mm, rng).beta.beta);
  }
  const Vector d = x.array() - x.mean();
  const double skew = d.array().cube().mean() / std::pow(d.array().square().mean(), 1.5);
  // skewness estimate has sd about sqrt(15 / reps) for a chi-square-like variable
  CHECK(std::abs(am - skew / 6.0) < 3.0 * std::sqrt(15.0 / reps) / 6.0);
  CHECK(am > 0.05);
}
