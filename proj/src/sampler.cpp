#include "bootbayes/sampler.hpp"

#include "bootbayes/numerics.hpp"
#include "bootbayes/rng.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

namespace bootbayes {

std::string to_string(ProposalKind kind) {
  switch (kind) {
    case ProposalKind::standard: return "standard";
    case ProposalKind::expanded: return "expanded";
    case ProposalKind::external: return "external";
  }
  return "standard";
}

ProposalKind proposal_from_string(const std::string& s) {
  if (s == "standard") return ProposalKind::standard;
  if (s == "expanded") return ProposalKind::expanded;
  if (s == "external") return ProposalKind::external;
  throw ValidationError("unknown proposal tag '" + s + "'");
}

Index BootstrapRun::stat_index(const std::string& id) const {
  for (std::size_t j = 0; j < stat_ids.size(); ++j) {
    if (stat_ids[j] == id) return static_cast<Index>(j);
  }
  throw ValidationError("unknown statistic '" + id + "'");
}

Replicate BootstrapRun::replicate(Index i) const {
  Replicate r;
  r.beta.beta = beta.row(i).transpose();
  if (alpha.cols() > 0) r.alpha.alpha = alpha.row(i).transpose();
  return r;
}

void parallel_for(Index count, int threads, const std::function<void(Index)>& body) {
  const Index workers = std::max<Index>(1, std::min<Index>(threads, count));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto chunk = [&](Index w) {
    for (Index i = w; i < count; i += workers) {
      try {
        body(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    chunk(0);
  } else {
    std::vector<std::thread> pool;
    for (Index w = 0; w < workers; ++w) pool.emplace_back(chunk, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

BootstrapRun allocate(const Family& family, const MlePoint& mle, Index B, std::uint64_t seed,
                      const std::vector<Statistic>& statistics) {
  if (B < 1) throw ValidationError("bootstrap needs B >= 1");
  BootstrapRun run;
  run.family_id = family.id();
  run.mle = mle;
  run.master_seed = seed;
  run.direct_density = family.direct_density();
  const Index p = family.dimension();
  run.beta.resize(B, p);
  run.alpha.resize(B, family.has_canonical() ? p : 0);
  run.delta.resize(B);
  run.log_xi.resize(B);
  run.log_proposal = Vector::Zero(B);
  for (const auto& s : statistics) run.stat_ids.push_back(s.id);
  run.stats.resize(B, static_cast<Index>(statistics.size()));
  return run;
}

void record(BootstrapRun& run, Index i, const Family& family, const Replicate& rep,
            const std::vector<Statistic>& statistics) {
  run.beta.row(i) = rep.beta.beta.transpose();
  if (run.alpha.cols() > 0) run.alpha.row(i) = rep.alpha.alpha.transpose();
  run.delta(i) = family.delta(rep.beta, run.mle);
  run.log_xi(i) = family.log_xi(rep.beta, run.mle);
  if (!std::isfinite(run.delta(i)) || !std::isfinite(run.log_xi(i))) {
    throw NumericalError("replication " + std::to_string(i) + " has a non-finite conversion factor");
  }
  for (std::size_t s = 0; s < statistics.size(); ++s) {
    run.stats(i, static_cast<Index>(s)) = statistics[s](rep);
  }
}

}  // namespace

BootstrapRun run_bootstrap(const Family& family, const MlePoint& mle, Index B,
                           std::uint64_t master_seed, const std::vector<Statistic>& statistics,
                           int threads) {
  BootstrapRun run = allocate(family, mle, B, master_seed, statistics);
  parallel_for(B, threads, [&](Index i) {
    Rng rng = substream(master_seed, static_cast<std::uint64_t>(i));
    record(run, i, family, family.sample(run.mle, rng), statistics);
  });
  return run;
}

BootstrapRun run_expanded_bootstrap(const ExponentialFamily& family, const MlePoint& mle, Index B,
                                    std::uint64_t master_seed, const BootstrapRun& pilot,
                                    const CovarianceExpansion& h,
                                    const std::vector<Statistic>& statistics, int threads) {
  if (pilot.size() < 2) throw ValidationError("expanded proposal: pilot covariance needs B >= 2");
  const Vector center = pilot.beta.colwise().mean().transpose();
  const Matrix centered = pilot.beta.rowwise() - center.transpose();
  const Matrix pilot_cov = centered.transpose() * centered / static_cast<double>(pilot.size() - 1);
  const Matrix expanded = h(pilot_cov);
  Eigen::LLT<Matrix> llt(expanded);
  if (llt.info() != Eigen::Success) throw NumericalError("expanded proposal: h(Sigma) is not SPD");
  const Matrix chol = llt.matrixL();
  const double logdet_h = log_det_spd(expanded);
  const Index p = family.dimension();

  BootstrapRun run = allocate(family, mle, B, master_seed, statistics);
  run.proposal = ProposalKind::expanded;
  std::vector<Index> rejections(static_cast<std::size_t>(B), 0);
  constexpr Index kMaxAttempts = 10000;
  parallel_for(B, threads, [&](Index i) {
    Rng rng = substream(master_seed, static_cast<std::uint64_t>(i));
    std::normal_distribution<double> normal;
    Vector z(p);
    ExpectationPoint beta;
    for (Index attempt = 0;; ++attempt) {
      if (attempt == kMaxAttempts) {
        throw NumericalError("expanded proposal: no valid draw for replication " + std::to_string(i));
      }
      for (Index j = 0; j < p; ++j) z(j) = normal(rng);
      beta.beta = center + chol * z;
      if (family.in_space(beta)) break;
      ++rejections[static_cast<std::size_t>(i)];
    }
    const Replicate rep = family.replicate_at(beta);
    record(run, i, family, rep, statistics);
    // log f_{beta_hat}(beta) through Hoeffding's form with the normal approximation at beta,
    // minus the log proposal density; constants common to every row are dropped.
    const double log_f_boot = -0.5 * log_det_spd(family.covariance(rep.alpha)) -
                              0.5 * deviance(family, beta, mle.beta_hat);
    const double log_q = -0.5 * logdet_h - 0.5 * z.squaredNorm();
    run.log_proposal(i) = log_f_boot - log_q;
  });
  for (Index r : rejections) run.rejected += r;
  if (2 * run.rejected > B + run.rejected) {
    throw NumericalError("expanded proposal: rejection rate above 50% (" +
                         std::to_string(run.rejected) + " rejected for " + std::to_string(B) +
                         " accepted)");
  }
  return run;
}

std::vector<Vector> nonparametric_resample(const Vector& z_values, Index B,
                                           std::uint64_t master_seed, const BinSpec& bins) {
  const Index n = z_values.size();
  if (n < 1) throw ValidationError("nonparametric_resample: need at least one z-value");
  std::vector<Vector> out(static_cast<std::size_t>(B));
  for (Index b = 0; b < B; ++b) {
    Rng rng = substream(master_seed, static_cast<std::uint64_t>(b));
    std::uniform_int_distribution<Index> pick(0, n - 1);
    Vector draw(n);
    for (Index k = 0; k < n; ++k) draw(k) = z_values(pick(rng));
    out[static_cast<std::size_t>(b)] = bin_zvalues(draw, bins).counts;
  }
  return out;
}

}  // namespace bootbayes
