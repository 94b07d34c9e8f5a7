#include "bootbayes/expfam.hpp"
#include "bootbayes/families.hpp"
#include "bootbayes/mvnormal.hpp"
#include "bootbayes/numerics.hpp"
#include "bootbayes/poisson_glm.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

using namespace bootbayes;

namespace {

ExpectationPoint scalar(double b) { return {Vector::Constant(1, b)}; }

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

Matrix random_spd(int d, std::mt19937_64& g) {
  std::normal_distribution<double> z;
  Matrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = z(g);
  return a * a.transpose() + 0.5 * Matrix::Identity(d, d);
}

// Each case draws a random expectation point for its family.
struct Case {
  std::shared_ptr<ExponentialFamily> family;
  std::function<ExpectationPoint(std::mt19937_64&)> draw;
};

std::vector<Case> cases() {
  std::vector<Case> out;
  out.push_back({std::make_shared<GammaScaleFamily>(12), [](std::mt19937_64& g) {
                   return scalar(std::uniform_real_distribution<double>(0.2, 5.0)(g));
                 }});
  out.push_back({std::make_shared<PoissonFamily>(), [](std::mt19937_64& g) {
                   return scalar(std::uniform_real_distribution<double>(0.1, 30.0)(g));
                 }});
  Matrix s(2, 2);
  s << 2.0, 0.3, 0.3, 1.0;
  out.push_back({std::make_shared<NormalTranslationFamily>(s), [](std::mt19937_64& g) {
                   std::normal_distribution<double> z(0.0, 3.0);
                   return ExpectationPoint{Vector{{z(g), z(g)}}};
                 }});
  for (int d = 1; d <= 3; ++d) {
    auto mvn = std::make_shared<MvNormalFamily>(d, 15);
    out.push_back({mvn, [mvn, d](std::mt19937_64& g) {
                     std::normal_distribution<double> z;
                     MvnParams p{Vector(d), random_spd(d, g)};
                     for (int i = 0; i < d; ++i) p.mu(i) = z(g);
                     return mvn->to_beta(p);
                   }});
  }
  Vector x = Vector::LinSpaced(9, -2.0, 2.0);
  auto glm = std::make_shared<PoissonGlmFamily>(poly_basis(x, 2));
  out.push_back({glm, [glm](std::mt19937_64& g) {
                   std::normal_distribution<double> z(0.0, 0.3);
                   Vector a(3);
                   a << 2.0 + z(g), z(g), z(g);
                   return glm->mean(CanonicalPoint{a});
                 }});
  return out;
}

}  // namespace

TEST_CASE("deviance of a point with itself is zero") {
  for (const auto& c : cases()) {
    std::mt19937_64 g(1);
    const auto b = c.draw(g);
    CHECK(deviance(*c.family, b, b) == 0.0);
  }
}

TEST_CASE("gamma deviance: closed form and quadrature of the expected log ratio") {
  const int n = 10;
  GammaScaleFamily fam(n);
  const double b1 = 1.0, b2 = 2.0;
  const double closed = 2.0 * n * (b1 / b2 - 1.0 + std::log(b2 / b1));
  CHECK(deviance(fam, scalar(b1), scalar(b2)) == doctest::Approx(closed).epsilon(1e-12));
  const double expected = integrate(
      [&](double x) {
        const double l1 = fam.log_density(b1, x);
        return std::exp(l1) * (l1 - fam.log_density(b2, x));
      },
      0.0, std::numeric_limits<double>::infinity());
  CHECK(2.0 * expected == doctest::Approx(closed).epsilon(1e-8));
}

TEST_CASE("mvn deviance with mu equal and Sigma doubled") {
  const int n = 22;
  MvNormalFamily fam(2, n);
  Matrix s1(2, 2);
  s1 << 1.3, 0.4, 0.4, 0.8;
  const Vector mu{{0.5, -1.0}};
  const auto b1 = fam.to_beta({mu, s1});
  const auto b2 = fam.to_beta({mu, 2.0 * s1});
  const double d = 2.0;
  const double oracle =
      n * (std::log((2.0 * s1).determinant() / s1.determinant()) +
           (s1 * (2.0 * s1).inverse()).trace() - d);
  CHECK(deviance(fam, b1, b2) == doctest::Approx(oracle).epsilon(1e-10));
}

TEST_CASE("gamma deviance difference closed form") {
  const int n = 100;
  GammaScaleFamily fam(n);
  const double bh = 1.7, b = 1.1 * bh;
  const MlePoint mle = fam.mle_point(scalar(bh));
  const double closed = n * (b / bh - bh / b) - 2.0 * n * std::log(b / bh);
  const double two_dev = 0.5 * (deviance(fam, scalar(b), scalar(bh)) - deviance(fam, scalar(bh), scalar(b)));
  CHECK(deviance_difference(fam, scalar(b), mle) == doctest::Approx(closed).epsilon(1e-10));
  CHECK(two_dev == doctest::Approx(closed).epsilon(1e-10));
}

TEST_CASE("normal translation: Delta 0 and R 1 everywhere") {
  Matrix s(2, 2);
  s << 1.0, 0.2, 0.2, 3.0;
  NormalTranslationFamily fam(s);
  const MlePoint mle = fam.mle_point({Vector{{1.0, 2.0}}});
  std::mt19937_64 g(3);
  std::normal_distribution<double> z(0.0, 5.0);
  for (int k = 0; k < 50; ++k) {
    const ExpectationPoint b{Vector{{z(g), z(g)}}};
    CHECK(std::abs(deviance_difference(fam, b, mle)) < 1e-10);
    CHECK(std::abs(conversion_factor(fam, b, mle)) < 1e-10);
    CHECK(fam.delta(b, mle) == 0.0);
  }
}

TEST_CASE("values at beta_hat are exact") {
  for (const auto& c : cases()) {
    std::mt19937_64 g(11);
    const MlePoint mle = c.family->mle_point(c.draw(g));
    CHECK(deviance_difference(*c.family, mle.beta_hat, mle) == 0.0);
    CHECK(xi_factor(*c.family, mle.beta_hat, mle) == 1.0);
    CHECK(conversion_factor(*c.family, mle.beta_hat, mle) == 0.0);
    CHECK(c.family->delta(mle.beta_hat, mle) == 0.0);
    CHECK(c.family->log_xi(mle.beta_hat, mle) == 0.0);
  }
}

TEST_CASE("xi factor examples") {
  PoissonFamily pois;
  CHECK(xi_factor(pois, scalar(4.0), pois.mle_point(scalar(1.0))) == doctest::Approx(2.0).epsilon(1e-12));

  MvNormalFamily mvn(2, 22);
  std::mt19937_64 g(5);
  const Matrix sh = random_spd(2, g), s = random_spd(2, g);
  const MlePoint mle = mvn.mle_point(mvn.to_beta({Vector::Zero(2), sh}));
  const double expect = std::pow(s.determinant() / sh.determinant(), 2.0);
  CHECK(xi_factor(mvn, mvn.to_beta({Vector{{0.3, 0.1}}, s}), mle) ==
        doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("gamma conversion factor equals the density ratio") {
  const int n = 10;
  GammaScaleFamily fam(n);
  const double bh = 0.8, b = 1.5 * bh;
  const MlePoint mle = fam.mle_point(scalar(bh));
  const double oracle = fam.log_density(b, bh) - fam.log_density(bh, b);
  CHECK(conversion_factor(fam, scalar(b), mle) == doctest::Approx(oracle).epsilon(1e-10));
  CHECK(log_xi_factor(fam, scalar(b), mle) == doctest::Approx(std::log(1.5)).epsilon(1e-12));
}

TEST_CASE("two-deviance identity on random pairs") {
  for (const auto& c : cases()) {
    CAPTURE(c.family->id());
    std::mt19937_64 g(17);
    for (int k = 0; k < 200; ++k) {
      const auto b = c.draw(g);
      const MlePoint mle = c.family->mle_point(c.draw(g));
      const double lhs = deviance_difference(*c.family, b, mle);
      const double rhs =
          0.5 * (deviance(*c.family, b, mle.beta_hat) - deviance(*c.family, mle.beta_hat, b));
      CHECK(rel_err(lhs, rhs) < tol::kDeviationIdentity);
    }
  }
}

TEST_CASE("deviance is nonnegative") {
  for (const auto& c : cases()) {
    CAPTURE(c.family->id());
    std::mt19937_64 g(19);
    for (int k = 0; k < 1000; ++k) {
      const auto b1 = c.draw(g), b2 = c.draw(g);
      CHECK(deviance(*c.family, b1, b2) >= -tol::kDevianceSlack);
    }
  }
}

TEST_CASE("canonical and mean maps round trip") {
  for (const auto& c : cases()) {
    CAPTURE(c.family->id());
    std::mt19937_64 g(23);
    for (int k = 0; k < 100; ++k) {
      const auto b = c.draw(g);
      const auto back = c.family->mean(c.family->canonical(b));
      CHECK((back.beta - b.beta).norm() <= tol::kRoundTrip * std::max(1.0, b.beta.norm()));
    }
  }
}

TEST_CASE("third cumulant matches finite differences of psi") {
  for (const auto& c : cases()) {
    CAPTURE(c.family->id());
    std::mt19937_64 g(29);
    std::normal_distribution<double> z;
    const auto alpha = c.family->canonical(c.draw(g));
    Vector v(c.family->dimension());
    for (Index j = 0; j < v.size(); ++j) v(j) = z(g);
    const Matrix cov = c.family->covariance(alpha);
    v /= std::sqrt(v.dot(cov * v));  // unit variance along v keeps the step scale sane
    const auto psi_at = [&](double t) { return c.family->psi(CanonicalPoint{alpha.alpha + t * v}); };
    const double h = 1e-2;
    // five-point third derivative, O(h^2)
    const double fd = (psi_at(2 * h) - 2 * psi_at(h) + 2 * psi_at(-h) - psi_at(-2 * h)) / (2 * h * h * h);
    const auto u = c.family->third_cumulant(alpha, v);
    REQUIRE(u.has_value());
    CHECK(*u == doctest::Approx(fd).epsilon(2e-3).scale(1.0));
  }
}

TEST_CASE("gamma skewness and cubic approximation") {
  const int n = 100;
  GammaScaleFamily fam(n);
  const MlePoint mle = fam.mle_point(scalar(1.0));
  const Vector v = Vector::Ones(1);
  CHECK(directional_skewness(fam, mle, v) == doctest::Approx(2.0 / std::sqrt(n)).epsilon(1e-12));
  CHECK(cubic_delta_approx(mle, 2.0 / std::sqrt(n), mle.beta_hat) == 0.0);
  const double b = 1.0 + 1.0 / std::sqrt(n);  // Z = 1
  const double approx = cubic_delta_approx(mle, 2.0 / std::sqrt(n), scalar(b));
  CHECK(approx == doctest::Approx(1.0 / (3.0 * std::sqrt(n))).epsilon(1e-12));
  CHECK(std::abs(deviance_difference(fam, scalar(b), mle) - approx) <= 5.0 / n);
  CHECK(cubic_delta_approx(fam, mle, v, scalar(b)) == doctest::Approx(approx).epsilon(1e-12));
}

namespace {
double cubic_gap(int n) {
  GammaScaleFamily fam(n);
  const MlePoint mle = fam.mle_point(scalar(1.0));
  double worst = 0.0;
  for (int k = -200; k <= 200; ++k) {
    const double z = 2.0 * k / 200.0;
    const double b = 1.0 + z / std::sqrt(static_cast<double>(n));
    const double exact = deviance_difference(fam, scalar(b), mle);
    worst = std::max(worst, std::abs(exact - z * z * z / (3.0 * std::sqrt(static_cast<double>(n)))));
  }
  return worst;
}
}  // namespace

TEST_CASE("gamma cubic law remainder is O(1/n)") {
  const double c = 25.0 * cubic_gap(25);
  CHECK(c > 0.0);
  CHECK(cubic_gap(100) <= c / 100.0);
  CHECK(cubic_gap(400) <= c / 400.0);
}

TEST_CASE("directional cubic approximation in the mvn family") {
  MvNormalFamily fam(2, 200);
  Matrix s(2, 2);
  s << 1.0, 0.5, 0.5, 2.0;
  const MlePoint mle = fam.mle_point(fam.to_beta({Vector{{0.2, 0.4}}, s}));
  Vector v(5);
  v << 0.3, -0.2, -0.1, 0.05, -0.2;
  const double sd = std::sqrt(v.dot(mle.v_hat * v));
  // move along alpha_hat + a v so that Z is about 1
  const double a = 1.0 / sd;
  const ExpectationPoint b = fam.mean(CanonicalPoint{mle.alpha_hat.alpha + a * v});
  const double exact = deviance_difference(fam, b, mle);
  const double approx = cubic_delta_approx(fam, mle, v, b);
  CHECK(std::abs(exact - approx) < 0.1 * std::abs(exact) + 2.0 / 200.0);
}
