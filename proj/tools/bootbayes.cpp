#include "bootbayes/accuracy.hpp"
#include "bootbayes/bca.hpp"
#include "bootbayes/families.hpp"
#include "bootbayes/fisher_correlation.hpp"
#include "bootbayes/poisson_glm.hpp"
#include "bootbayes/store.hpp"
#include "bootbayes/studies.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

namespace bb = bootbayes;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kUsage = 2, kNumerical = 3 };

struct Config {
  std::uint64_t seed = 20120101;
  bb::Index B = 0;
  bb::Index K = 0;
  std::string prior = "jeffreys";
  double level = 0.95;
  int degree = 4;
  std::string bins = "-4.4,0.2,49";
  std::optional<double> truncate;
  std::string zfile;
  std::string scores;
  std::string out = "out";
  std::string format = "json";
  int threads = 0;
  std::string store;
  std::string spec;
};

int default_threads() {
  if (const char* env = std::getenv("BOOTBAYES_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
    throw bb::ValidationError("BOOTBAYES_THREADS must be a positive integer");
  }
  return 1;
}

bb::BinSpec parse_bins(const std::string& s) {
  std::stringstream ss(s);
  std::string a, b, c;
  if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c)) {
    throw bb::ValidationError("--bins expects first_center,width,count");
  }
  bb::BinSpec spec;
  try {
    spec.first_center = std::stod(a);
    spec.width = std::stod(b);
    spec.count = std::stoi(c);
  } catch (const std::exception&) {
    throw bb::ValidationError("--bins expects first_center,width,count");
  }
  if (spec.count < 1 || !(spec.width > 0.0)) throw bb::ValidationError("--bins needs count >= 1, width > 0");
  return spec;
}

bb::StudyOptions study_options(const Config& c, bb::Index default_B, bb::Index default_K) {
  bb::StudyOptions o;
  o.B = c.B > 0 ? c.B : default_B;
  o.K = c.K > 0 ? c.K : default_K;
  o.seed = c.seed;
  o.level = c.level;
  o.threads = c.threads;
  o.truncate = c.truncate;
  return o;
}

bb::ScoresDataset scores_of(const Config& c) {
  return c.scores.empty() ? bb::embedded_scores() : bb::load_scores(c.scores);
}

void write_summary_csv(const std::filesystem::path& path, const std::vector<bb::PosteriorSummary>& rows) {
  std::ofstream out(path);
  if (!out) throw bb::ValidationError("cannot write " + path.string());
  out << "statistic,prior,estimate,lo,hi,level,cv_internal,ess,B,seed\n";
  out.precision(17);
  for (const auto& s : rows) {
    out << s.statistic << ',' << s.prior << ',' << s.estimate << ',' << s.ci.lo << ',' << s.ci.hi
        << ',' << s.ci.level << ',' << s.cv_internal << ',' << s.ess << ',' << s.B << ',' << s.seed
        << '\n';
  }
}

void emit(const Config& c, const json& report, const std::vector<bb::NamedCurve>& curves,
          const std::vector<std::pair<std::string, const bb::BootstrapRun*>>& stores,
          const std::vector<bb::PosteriorSummary>& summaries) {
  bb::write_outputs(c.out, report, curves, stores);
  if (c.format == "csv") write_summary_csv(std::filesystem::path(c.out) / "summaries.csv", summaries);
  std::cout << report.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// `run`: a built-in family described by a JSON spec file.

struct RunSetup {
  std::unique_ptr<bb::Family> family;
  bb::MlePoint mle;
  std::vector<bb::Statistic> statistics;
  std::optional<bb::Matrix> rows;  // i.i.d. data, when the family has it
  json description;
};

std::vector<double> numbers(const json& j, const char* key) {
  if (!j.contains(key)) throw bb::ValidationError(std::string("family spec needs '") + key + "'");
  return j.at(key).get<std::vector<double>>();
}

bb::Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const bb::Vector>(v.data(), static_cast<bb::Index>(v.size()));
}

RunSetup make_setup(const json& spec, const Config& c) {
  RunSetup s;
  s.description = spec;
  const std::string name = spec.at("family").get<std::string>();
  std::vector<std::string> stat_ids = spec.value("statistics", std::vector<std::string>{});

  auto coordinate_stats = [&](bb::Index p) {
    if (stat_ids.empty()) {
      for (bb::Index j = 0; j < p; ++j) s.statistics.push_back(bb::coordinate_statistic(j));
      return;
    }
    for (const auto& id : stat_ids) {
      bool found = false;
      for (bb::Index j = 0; j < p; ++j) {
        if (id == "beta_" + std::to_string(j + 1)) {
          s.statistics.push_back(bb::coordinate_statistic(j));
          found = true;
        }
      }
      if (!found) throw bb::ValidationError("unknown statistic '" + id + "' for family " + name);
    }
  };

  if (name == "gamma_scale") {
    auto f = std::make_unique<bb::GammaScaleFamily>(spec.at("n").get<int>());
    s.mle = f->mle_point({to_vector(numbers(spec, "beta_hat"))});
    s.family = std::move(f);
    coordinate_stats(1);
  } else if (name == "poisson") {
    auto f = std::make_unique<bb::PoissonFamily>();
    s.mle = f->mle_point({to_vector(numbers(spec, "beta_hat"))});
    s.family = std::move(f);
    coordinate_stats(1);
  } else if (name == "normal_translation") {
    const auto rows = spec.at("sigma").get<std::vector<std::vector<double>>>();
    bb::Matrix sigma(static_cast<bb::Index>(rows.size()), static_cast<bb::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size()) throw bb::ValidationError("sigma must be square");
      for (std::size_t j = 0; j < rows.size(); ++j) sigma(static_cast<bb::Index>(i), static_cast<bb::Index>(j)) = rows[i][j];
    }
    auto f = std::make_unique<bb::NormalTranslationFamily>(sigma);
    s.mle = f->mle_point({to_vector(numbers(spec, "beta_hat"))});
    coordinate_stats(f->dimension());
    s.family = std::move(f);
  } else if (name == "mvnormal") {
    const bb::ScoresDataset data = spec.contains("data") ? bb::load_scores(spec.at("data").get<std::string>())
                                                         : scores_of(c);
    if (data.rows.cols() != 2) throw bb::ValidationError("mvnormal runs use two-column data");
    auto f = std::make_unique<bb::MvNormalFamily>(2, static_cast<int>(data.rows.rows()));
    s.mle = f->mle_point(f->to_beta(bb::mvn_mle(data.rows)));
    s.rows = data.rows;
    const bb::MvNormalFamily* fp = f.get();
    if (stat_ids.empty()) stat_ids = {"eigenratio", "correlation"};
    for (const auto& id : stat_ids) {
      if (id == "eigenratio") {
        s.statistics.push_back({id, [fp](const bb::Replicate& r) {
                                  return bb::statistic_eigenratio(fp->to_params(r.beta).sigma);
                                }});
      } else if (id == "correlation") {
        s.statistics.push_back({id, [fp](const bb::Replicate& r) {
                                  return bb::statistic_correlation(fp->to_params(r.beta).sigma);
                                }});
      } else {
        throw bb::ValidationError("unknown statistic '" + id + "' for family mvnormal");
      }
    }
    s.family = std::move(f);
  } else if (name == "fisher_correlation") {
    auto f = std::make_unique<bb::FisherCorrelationFamily>(spec.value("n", 22));
    s.mle = f->mle_point({bb::Vector::Constant(1, spec.at("theta_hat").get<double>())});
    s.family = std::move(f);
    if (!stat_ids.empty() && (stat_ids.size() != 1 || stat_ids[0] != "correlation")) {
      throw bb::ValidationError("fisher_correlation supports the statistic 'correlation' only");
    }
    s.statistics.push_back({"correlation", [](const bb::Replicate& r) { return r.beta.beta(0); }});
  } else if (name == "poisson_glm") {
    const std::string zfile = spec.value("zfile", c.zfile);
    if (zfile.empty()) throw bb::ValidationError("poisson_glm needs 'zfile' in the spec or --zfile");
    const bb::BinnedCounts bins = bb::bin_zvalues(bb::load_zvalues(zfile).z, parse_bins(c.bins));
    const int degree = spec.value("degree", c.degree);
    if (degree < 0 || degree >= bins.counts.size()) throw bb::ValidationError("degree out of range");
    auto f = std::make_unique<bb::PoissonGlmFamily>(bb::poly_basis(bins.centers, degree));
    s.mle = f->mle_point({f->design().transpose() * bins.counts});
    const bb::PoissonGlmFamily* fp = f.get();
    const bb::Vector centers = bins.centers;
    if (stat_ids.empty()) stat_ids = {"fdr3"};
    for (const auto& id : stat_ids) {
      if (id.rfind("fdr", 0) != 0) throw bb::ValidationError("unknown statistic '" + id + "' for poisson_glm");
      const double z = std::stod(id.substr(3));
      s.statistics.push_back({id, [fp, centers, z](const bb::Replicate& r) {
                                return bb::statistic_fdr(fp->mu(r.alpha), z, centers);
                              }});
    }
    s.family = std::move(f);
  } else {
    throw bb::ValidationError("unknown family '" + name + "'");
  }
  return s;
}

bool store_matches(const bb::BootstrapRun& run, const RunSetup& s, bb::Index B, std::uint64_t seed) {
  if (run.family_id != s.family->id() || run.size() != B || run.master_seed != seed) return false;
  if (run.stat_ids.size() != s.statistics.size()) return false;
  for (std::size_t j = 0; j < s.statistics.size(); ++j) {
    if (run.stat_ids[j] != s.statistics[j].id) return false;
  }
  return run.mle.beta_hat.beta == s.mle.beta_hat.beta;
}

bb::Prior prior_for(const std::string& name, const RunSetup& s, const bb::BootstrapRun& run,
                    const std::string& stat_id, std::optional<bb::BcaConstants>& bca) {
  if (name == "flat") return bb::Prior::flat();
  if (name == "jeffreys") {
    if (run.direct_density) {
      return bb::Prior::from_density("jeffreys_correlation", [](const bb::Replicate& r) {
        return std::log(bb::prior_jeffreys_correlation(r.beta.beta(0)));
      });
    }
    return bb::Prior::jeffreys();
  }
  if (name == "inverse-wishart") {
    const auto* mvn = dynamic_cast<const bb::MvNormalFamily*>(s.family.get());
    if (!mvn) throw bb::ValidationError("--prior inverse-wishart needs the mvnormal family");
    return bb::Prior::from_density("inverse_wishart", [mvn](const bb::Replicate& r) {
      return bb::prior_inverse_wishart_log(mvn->to_params(r.beta).sigma,
                                           bb::Matrix::Identity(mvn->d(), mvn->d()), 2.0);
    });
  }
  if (name == "bca") {
    const bb::Statistic* stat = nullptr;
    for (const auto& st : s.statistics) {
      if (st.id == stat_id) stat = &st;
    }
    const double theta_hat = (*stat)(s.family->replicate_at(s.mle.beta_hat));
    bb::BcaConstants c;
    c.z0 = bb::z0_estimate(run, stat_id, theta_hat);
    const auto* ef = dynamic_cast<const bb::ExponentialFamily*>(s.family.get());
    if (ef && ef->third_cumulant(s.mle.alpha_hat, bb::Vector::Ones(ef->dimension()))) {
      c.a = bb::family_skew_acceleration(*ef, s.mle, [&](const bb::ExpectationPoint& b) {
        return (*stat)(ef->replicate_at(b));
      });
      c.method = bb::AccelerationMethod::family_skew_a;
    } else if (s.rows) {
      const auto* mvn = dynamic_cast<const bb::MvNormalFamily*>(s.family.get());
      const bb::Vector loo = bb::leave_one_out(*s.rows, [&](const bb::Matrix& m) {
        return (*stat)(mvn->replicate_at(mvn->to_beta(bb::mvn_mle(m))));
      });
      c.a = bb::jackknife_acceleration(loo);
      c.method = bb::AccelerationMethod::jackknife_a;
    }
    bca = c;
    return bb::bca_prior(run, stat_id, c);
  }
  throw bb::ValidationError("unknown prior '" + name + "'");
}

int cmd_run(const Config& c) {
  if (c.spec.empty()) throw bb::ValidationError("run needs --spec <family spec JSON>");
  std::ifstream in(c.spec);
  if (!in) throw bb::ValidationError("cannot open family spec " + c.spec);
  json spec;
  try {
    spec = json::parse(in);
  } catch (const json::exception& e) {
    throw bb::ValidationError(std::string("family spec: ") + e.what());
  }
  const RunSetup s = make_setup(spec, c);
  const bb::Index B = c.B > 0 ? c.B : 4000;
  const std::filesystem::path store =
      c.store.empty() ? std::filesystem::path(c.out) / "store.csv" : std::filesystem::path(c.store);

  bb::BootstrapRun run;
  bool reused = false;
  if (std::filesystem::exists(store)) {
    bb::BootstrapRun cached = bb::read_store(store);
    if (store_matches(cached, s, B, c.seed)) {
      run = std::move(cached);
      reused = true;
    }
  }
  if (!reused) {
    run = bb::run_bootstrap(*s.family, s.mle, B, c.seed, s.statistics, c.threads);
    if (store.has_parent_path()) std::filesystem::create_directories(store.parent_path());
    bb::write_store(run, store, c.K);
  }
  const std::string hash = bb::file_digest(store);
  std::cerr << (reused ? "reusing replication store " : "wrote replication store ") << store.string()
            << " (fnv1a " << hash << ")\n";

  json report = {{"seed", c.seed}, {"B", B}, {"K", c.K}, {"version", bb::kVersion},
                 {"level", c.level}, {"family", run.family_id}, {"spec", s.description},
                 {"prior", c.prior}, {"store_hash", hash}};
  json summaries = json::array();
  json accuracy = json::array();
  std::vector<bb::PosteriorSummary> rows;
  std::vector<bb::NamedCurve> curves;
  for (const auto& st : s.statistics) {
    std::optional<bb::BcaConstants> bca;
    const bb::Prior prior = prior_for(c.prior, s, run, st.id, bca);
    const bb::WeightVector w = bb::importance_weights(run, prior, c.truncate);
    bb::PosteriorSummary summary = bb::summarize(run, w, st.id, c.level);
    summary.bca = bca;
    summaries.push_back(bb::to_json(summary));
    rows.push_back(summary);
    const bb::Vector t = run.stat(st.id);
    curves.push_back({st.id, bb::weighted_density(t, w, bb::grid_covering(t, 80))});
    if (c.K > 0) {
      accuracy.push_back(bb::to_json(bb::bab_standard_error(*s.family, run, prior, st.id, c.K, c.seed,
                                                            bb::Quantity::mean(), c.threads)));
    }
  }
  report["summaries"] = summaries;
  report["accuracy"] = accuracy;
  emit(c, report, curves, {}, rows);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian posteriors by reweighting parametric bootstrap replications"};
  app.require_subcommand(1);
  Config c;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", c.seed, "master seed");
    sub->add_option("--B", c.B, "bootstrap replications")->check(CLI::PositiveNumber);
    sub->add_option("--K", c.K, "outer replications for bootstrap-after-bootstrap (0 skips)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--level", c.level, "credible level")->check(CLI::Range(0.0, 1.0).description("in (0, 1)"));
    sub->add_option("--truncate", c.truncate, "cap raw weights at this quantile")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--format", c.format, "summary format")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", c.threads, "worker threads (default: BOOTBAYES_THREADS or 1)")
        ->check(CLI::PositiveNumber);
  };

  auto* corr = app.add_subcommand("correlation", "student-score correlation study");
  common(corr);
  corr->add_option("--scores", c.scores, "scores CSV with header mech,vec (default: embedded)");
  auto* eig = app.add_subcommand("eigenratio", "student-score eigenratio study");
  common(eig);
  eig->add_option("--scores", c.scores, "scores CSV with header mech,vec (default: embedded)");
  auto* pro = app.add_subcommand("prostate", "Fdr(3) and model selection from binned z-values");
  common(pro);
  pro->add_option("--zfile", c.zfile, "z-value file, one value per line");
  pro->add_option("--bins", c.bins, "first_center,width,count");
  auto* run = app.add_subcommand("run", "generic run from a family spec, reusing a replication store");
  common(run);
  run->add_option("--spec", c.spec, "family spec JSON");
  run->add_option("--store", c.store, "replication store path (default: <out>/store.csv)");
  run->add_option("--prior", c.prior, "prior")
      ->check(CLI::IsMember({"jeffreys", "flat", "bca", "inverse-wishart"}));
  run->add_option("--zfile", c.zfile, "z-value file for poisson_glm specs");
  run->add_option("--bins", c.bins, "first_center,width,count");
  run->add_option("--degree", c.degree, "polynomial degree for poisson_glm specs");
  run->add_option("--scores", c.scores, "scores CSV for mvnormal specs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (!(c.level > 0.0 && c.level < 1.0)) throw bb::ValidationError("--level must lie in (0, 1)");
    if (c.threads == 0) c.threads = default_threads();
    if (*corr) {
      const auto s = bb::study_correlation(study_options(c, 10000, 0), scores_of(c));
      emit(c, s.to_json(), s.curves, {{"correlation", &s.run}}, {s.bootstrap, s.jeffreys, s.bca});
    } else if (*eig) {
      const auto s = bb::study_eigenratio(study_options(c, 10000, 0), scores_of(c));
      emit(c, s.to_json(), s.curves, {{"eigenratio", &s.run}},
           {s.bootstrap, s.jeffreys, s.bca, s.inverse_wishart});
    } else if (*pro) {
      if (c.zfile.empty()) throw bb::ValidationError("prostate needs --zfile <z-value file>");
      const auto s = bb::study_prostate(bb::load_zvalues(c.zfile), study_options(c, 4000, 200),
                                        parse_bins(c.bins));
      emit(c, s.to_json(), s.curves, {{"m4", &s.run_m4}, {"m8", &s.run_m8}},
           {s.m4_bootstrap, s.m4_jeffreys, s.m4_bca, s.m8_jeffreys});
    } else if (*run) {
      return cmd_run(c);
    }
  } catch (const bb::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const bb::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const bb::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
