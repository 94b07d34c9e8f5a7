#include "bootbayes/store.hpp"
#include "bootbayes/studies.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

using namespace bootbayes;

namespace {

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("bootbayes_studies_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

ZValueDataset synthetic_z(Index n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::bernoulli_distribution alt(0.05);
  ZValueDataset d;
  d.z.resize(n);
  for (Index i = 0; i < n; ++i) d.z(i) = nd(gen) + (alt(gen) ? 3.0 : 0.0);
  return d;
}

}  // namespace

TEST_CASE("correlation study is reproducible and reports its pieces") {
  StudyOptions o;
  o.B = 1000;
  o.threads = 2;
  const CorrelationStudy a = study_correlation(o);
  o.threads = 3;
  const CorrelationStudy b = study_correlation(o);
  CHECK(a.to_json() == b.to_json());
  const auto j = a.to_json();
  for (const char* key : {"exact_ci", "jeffreys_ci", "bca_ci", "rbd", "acceleration", "seed", "B", "K", "version"}) {
    CHECK_MESSAGE(j.contains(key), key);
  }
  CHECK(a.n == 22);
  CHECK(a.theta_hat == doctest::Approx(0.498).epsilon(1e-3));
  CHECK(a.jeffreys.ci.lo < a.theta_hat);
  CHECK(a.jeffreys.ci.hi > a.theta_hat);
  CHECK_FALSE(a.bab);
}

TEST_CASE("eigenratio study: Jeffreys weights barely move the mean") {
  StudyOptions o;
  o.B = 4000;
  o.threads = 4;
  const EigenratioStudy s = study_eigenratio(o);
  MESSAGE("eigenratio Jeffreys ESS / B = " << s.jeffreys.ess / static_cast<double>(o.B));
  CHECK(s.jeffreys.estimate == doctest::Approx(s.bootstrap.estimate).epsilon(0.01));
  CHECK(s.jeffreys.ess > 0.1 * static_cast<double>(o.B));
  CHECK(s.bca_jeffreys_cor < 0.9);
  CHECK(s.theta_hat == doctest::Approx(0.793).epsilon(1e-3));
  CHECK(s.inverse_wishart.ci.lo < s.inverse_wishart.ci.hi);
}

TEST_CASE("bad options are validation errors") {
  StudyOptions o;
  o.B = 0;
  CHECK_THROWS_AS(study_correlation(o), ValidationError);
  o.B = 100;
  o.level = 1.0;
  CHECK_THROWS_AS(study_eigenratio(o), ValidationError);
}

TEST_CASE("z-value binning") {
  const BinSpec spec;
  CHECK(spec.lower_edge() == doctest::Approx(-4.5));
  CHECK(spec.upper_edge() == doctest::Approx(5.3));
  // left edge in, interior edge goes to the upper bin, right edge closed
  const BinnedCounts b = bin_zvalues(Vector{{-4.5, -4.3, -4.29, 5.3, 5.31, -9.0}}, spec);
  CHECK(b.counts(0) == 1.0);
  CHECK(b.counts(1) == 2.0);
  CHECK(b.counts(48) == 1.0);
  CHECK(b.out_of_range == 2);
  CHECK(b.counts.sum() + static_cast<double>(b.out_of_range) == 6.0);
  CHECK(b.centers(0) == doctest::Approx(-4.4));
  CHECK(b.centers(48) == doctest::Approx(5.2));

  const ZValueDataset z = synthetic_z(6033, 5);
  const BinnedCounts all = bin_zvalues(z.z, spec);
  CHECK(all.counts.sum() + static_cast<double>(all.out_of_range) == 6033.0);
}

TEST_CASE("dataset loaders") {
  const auto dir = scratch("load");
  {
    std::ofstream(dir / "z.txt") << "0.5\n\n-1.25\n3\n";
    std::ofstream(dir / "bad.txt") << "0.5\nabc\n";
    std::ofstream(dir / "s.csv") << "mech,vec\n1,2\n3,4.5\n";
    std::ofstream(dir / "s_bad.csv") << "a,b\n1,2\n";
    std::ofstream(dir / "s_short.csv") << "mech,vec\n1\n";
  }
  const ZValueDataset z = load_zvalues(dir / "z.txt");
  REQUIRE(z.z.size() == 3);
  CHECK(z.z(1) == -1.25);
  CHECK_THROWS_AS(load_zvalues(dir / "bad.txt"), ValidationError);
  CHECK_THROWS_AS(load_zvalues(dir / "missing.txt"), ValidationError);
  const ScoresDataset s = load_scores(dir / "s.csv");
  REQUIRE(s.rows.rows() == 2);
  CHECK(s.rows(1, 1) == 4.5);
  CHECK_THROWS_AS(load_scores(dir / "s_bad.csv"), ValidationError);
  CHECK_THROWS_AS(load_scores(dir / "s_short.csv"), ValidationError);
  CHECK(embedded_scores().rows.rows() == 22);
}

TEST_CASE("aic selection over nested poisson models") {
  const BinSpec spec;
  const Matrix x8 = poly_basis(spec.centers(), kMaxDegree);
  const BinnedCounts b = bin_zvalues(synthetic_z(6033, 6).z, spec);
  const int pick = aic_selected_degree(x8, b.counts);
  CHECK(pick >= kMinDegree);
  CHECK(pick <= kMaxDegree);
  std::vector<PoissonGlmFamily> nested;
  for (int m = kMinDegree; m <= kMaxDegree; ++m) nested.emplace_back(x8.leftCols(m + 1));
  CHECK(aic_selected_degree(nested, x8.transpose() * b.counts) == pick);
  // a pure quadratic log-mean is picked as degree 2
  const Vector mu = (8.0 - 0.5 * spec.centers().array().square()).exp();
  CHECK(aic_selected_degree(x8, mu.array().round().matrix()) == 2);
}

TEST_CASE("prostate pipeline on synthetic z-values") {
  StudyOptions o;
  o.B = 400;
  o.K = 10;
  o.threads = 4;
  const ZValueDataset z = synthetic_z(6033, 7);
  const ProstateStudy s = study_prostate(z, o);
  CHECK(s.N == 6033);
  REQUIRE(s.table.size() == 7);
  double boot = 0.0, bayes = 0.0, np = 0.0;
  for (std::size_t i = 0; i < s.table.size(); ++i) {
    boot += s.table[i].boot;
    bayes += s.table[i].bayes;
    np += s.table[i].nonparametric;
    if (i > 0) CHECK(s.table[i].deviance <= s.table[i - 1].deviance + 1e-9);
    CHECK(s.table[i].aic == doctest::Approx(s.table[i].deviance + 2.0 * (s.table[i].degree + 1)));
  }
  CHECK(boot == doctest::Approx(1.0));
  CHECK(bayes == doctest::Approx(1.0));
  CHECK(np == doctest::Approx(1.0));
  int best = 2;
  for (const auto& r : s.table) if (r.aic < s.row(best).aic) best = r.degree;
  CHECK(s.aic_best == best);
  CHECK(s.fdr_m4 > 0.0);
  CHECK(s.fdr_m4 < 1.0);
  CHECK(s.selection_bab.size() == 7);
  CHECK(s.m4_bca.bca);
  const auto j = s.to_json();
  CHECK(j["table"].size() == 7);
  CHECK(j.contains("version"));

  // M8 replications carry the 0/1 selection indicators
  const Vector sel = s.run_m8.stat("sel_m" + std::to_string(s.aic_best));
  CHECK(((sel.array() == 0.0) || (sel.array() == 1.0)).all());

  const auto dir = scratch("out");
  write_outputs(dir, j, s.curves, {{"m4", &s.run_m4}});
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "density_m4_jeffreys.csv"));
  const BootstrapRun back = read_store(dir / "store_m4.csv");
  CHECK(back.delta == s.run_m4.delta);
}
