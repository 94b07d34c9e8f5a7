#ifndef BOOTBAYES_STUDIES_HPP
#define BOOTBAYES_STUDIES_HPP

#include "bootbayes/accuracy.hpp"
#include "bootbayes/bca.hpp"
#include "bootbayes/datasets.hpp"
#include "bootbayes/mvnormal.hpp"
#include "bootbayes/poisson_glm.hpp"
#include "bootbayes/posterior.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bootbayes {

struct StudyOptions {
  Index B = 10000;
  Index K = 0;  // outer replications for bootstrap-after-bootstrap; 0 skips it
  std::uint64_t seed = 20120101;
  double level = 0.95;
  int threads = 1;
  std::optional<double> truncate;
  int density_bins = 80;
};

nlohmann::json provenance(const StudyOptions& o);

struct NamedCurve {
  std::string name;
  DensityCurve curve;
};

struct CorrelationStudy {
  StudyOptions options;
  Index n = 0;
  double theta_hat = 0.0;
  std::pair<double, double> exact_ci;
  BootstrapRun run;
  PosteriorSummary bootstrap;
  PosteriorSummary jeffreys;
  PosteriorSummary bca;
  BcaConstants constants;
  double a_jackknife = 0.0;
  double a_family_skew = 0.0;
  RbdResult rbd;
  std::optional<AccuracyReport> bab;
  std::optional<AccuracyReport> jackknife;
  std::vector<NamedCurve> curves;

  nlohmann::json to_json() const;
};

/// Sample correlation of the scores: exact interval, Jeffreys posterior with
/// pi = 1/(1 - theta^2) and R from the density ratio, BCa, RBD.
CorrelationStudy study_correlation(const StudyOptions& options,
                                   const ScoresDataset& data = embedded_scores());

struct EigenratioStudy {
  StudyOptions options;
  double theta_hat = 0.0;
  MvnParams gamma_hat;
  BootstrapRun run;
  PosteriorSummary bootstrap;
  PosteriorSummary jeffreys;
  PosteriorSummary bca;
  PosteriorSummary inverse_wishart;
  BcaConstants constants;
  double a_jackknife = 0.0;
  double a_family_skew = 0.0;
  double bca_jeffreys_cor = 0.0;  // correlation of the two log-weight vectors
  std::optional<AccuracyReport> bab;
  std::vector<NamedCurve> curves;

  nlohmann::json to_json() const;
};

/// Eigenratio lambda_1/(lambda_1 + lambda_2) of the bivariate normal covariance.
EigenratioStudy study_eigenratio(const StudyOptions& options,
                                 const ScoresDataset& data = embedded_scores());

struct ModelRow {
  int degree = 0;
  double deviance = 0.0;
  double aic = 0.0;
  double boot = 0.0;         // unweighted selection proportion, M8 bootstrap
  double bayes = 0.0;        // Jeffreys-weighted selection proportion
  double se = 0.0;           // bab standard error of `bayes` (0 when K == 0)
  double nonparametric = 0.0;
};

struct ProstateStudy {
  StudyOptions options;
  Index N = 0;
  BinnedCounts bins;
  std::vector<ModelRow> table;  // degrees 2..8
  int aic_best = 0;
  double fdr_m4 = 0.0;
  double fdr_m8 = 0.0;
  BootstrapRun run_m4;
  BootstrapRun run_m8;
  PosteriorSummary m4_bootstrap;
  PosteriorSummary m4_jeffreys;
  PosteriorSummary m4_bca;
  PosteriorSummary m8_jeffreys;
  BcaConstants m4_constants;
  std::vector<AccuracyReport> selection_bab;
  std::vector<NamedCurve> curves;

  const ModelRow& row(int degree) const { return table.at(static_cast<std::size_t>(degree - 2)); }
  nlohmann::json to_json() const;
};

inline constexpr int kMinDegree = 2;
inline constexpr int kMaxDegree = 8;

/// Degree (2..8) minimizing AIC for counts whose degree-8 sufficient statistic is beta,
/// with nested models X_m = first m + 1 columns of X_8. Ties go to the smaller degree.
int aic_selected_degree(const std::vector<PoissonGlmFamily>& nested, const Vector& beta);
int aic_selected_degree(const Matrix& x8, const Vector& counts);

ProstateStudy study_prostate(const ZValueDataset& z, const StudyOptions& options,
                             const BinSpec& spec = BinSpec{});

/// Writes report.json, density CSVs and replication stores under `dir`.
void write_outputs(const std::filesystem::path& dir, const nlohmann::json& report,
                   const std::vector<NamedCurve>& curves,
                   const std::vector<std::pair<std::string, const BootstrapRun*>>& stores);

}  // namespace bootbayes

#endif  // BOOTBAYES_STUDIES_HPP
