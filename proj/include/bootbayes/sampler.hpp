#ifndef BOOTBAYES_SAMPLER_HPP
#define BOOTBAYES_SAMPLER_HPP

#include "bootbayes/datasets.hpp"
#include "bootbayes/expfam.hpp"
#include "bootbayes/statistic.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace bootbayes {

enum class ProposalKind { standard, expanded, external };

std::string to_string(ProposalKind kind);
ProposalKind proposal_from_string(const std::string& s);

/// B parametric bootstrap replications with everything the reweighting steps need.
///
/// Row i holds beta_i (and alpha_i when the family has canonical coordinates), the
/// deviance difference, log xi, and every registered statistic. For expanded
/// proposals `log_proposal` carries log f_{beta_hat}(beta_i) - log q(beta_i); it is
/// zero otherwise. The log conversion factor of row i is log_xi + delta + log_proposal.
struct BootstrapRun {
  std::string family_id;
  MlePoint mle;
  std::uint64_t master_seed = 0;
  ProposalKind proposal = ProposalKind::standard;
  bool direct_density = false;
  Matrix beta;
  Matrix alpha;
  Vector delta;
  Vector log_xi;
  Vector log_proposal;
  std::vector<std::string> stat_ids;
  Matrix stats;
  Index rejected = 0;

  Index size() const { return beta.rows(); }
  Index stat_index(const std::string& id) const;
  Vector stat(const std::string& id) const { return stats.col(stat_index(id)); }
  Vector log_conversion() const { return log_xi + delta + log_proposal; }
  Replicate replicate(Index i) const;
};

/// Draws beta_i from f_{beta_hat} on substream (master_seed, i) for i < B. The result
/// does not depend on `threads`.
BootstrapRun run_bootstrap(const Family& family, const MlePoint& mle, Index B,
                           std::uint64_t master_seed, const std::vector<Statistic>& statistics,
                           int threads = 1);

/// Covariance expansion h(Sigma_beta) applied to the pilot covariance.
using CovarianceExpansion = std::function<Matrix(const Matrix&)>;

/// Draws beta_i ~ N_p(mean_pilot, h(cov_pilot)), redrawing proposals outside the
/// expectation space. Throws NumericalError when more than half the proposals are rejected.
BootstrapRun run_expanded_bootstrap(const ExponentialFamily& family, const MlePoint& mle, Index B,
                                    std::uint64_t master_seed, const BootstrapRun& pilot,
                                    const CovarianceExpansion& h,
                                    const std::vector<Statistic>& statistics, int threads = 1);

/// Nonparametric bootstrap of the z-values: resample N with replacement and re-bin.
std::vector<Vector> nonparametric_resample(const Vector& z_values, Index B,
                                           std::uint64_t master_seed, const BinSpec& bins);

/// Runs body(i) for i in [0, count) over `threads` workers. The first exception by
/// index is rethrown.
void parallel_for(Index count, int threads, const std::function<void(Index)>& body);

}  // namespace bootbayes

#endif  // BOOTBAYES_SAMPLER_HPP
