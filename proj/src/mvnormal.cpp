#include "bootbayes/mvnormal.hpp"

#include <random>

namespace bootbayes {

MvnParams mvn_mle(const Matrix& rows) {
  if (rows.rows() < 1) throw ValidationError("mvn_mle: no observations");
  const double n = static_cast<double>(rows.rows());
  Vector mu = rows.colwise().mean().transpose();
  const Matrix centered = rows.rowwise() - mu.transpose();
  Matrix sigma = centered.transpose() * centered / n;
  return {std::move(mu), std::move(sigma)};
}

MvNormalFamily::MvNormalFamily(int d, int n) : d_(d), n_(n) {
  if (d < 1) throw ValidationError("MvNormalFamily: d must be positive");
  if (n <= d) throw ValidationError("MvNormalFamily: need n > d for a nonsingular covariance");
}

std::string MvNormalFamily::id() const {
  return "mvnormal(d=" + std::to_string(d_) + ",n=" + std::to_string(n_) + ")";
}

ExpectationPoint MvNormalFamily::to_beta(const MvnParams& gamma) const {
  Vector beta(dimension());
  beta.head(d_) = gamma.mu;
  Index pos = d_;
  for (int j = 0; j < d_; ++j) {
    for (int k = j; k < d_; ++k) beta(pos++) = gamma.sigma(j, k) + gamma.mu(j) * gamma.mu(k);
  }
  return {std::move(beta)};
}

MvnParams MvNormalFamily::to_params(const ExpectationPoint& beta) const {
  if (beta.beta.size() != dimension()) throw DomainError("mvnormal: beta has wrong dimension");
  MvnParams g{beta.beta.head(d_), Matrix(d_, d_)};
  Index pos = d_;
  for (int j = 0; j < d_; ++j) {
    for (int k = j; k < d_; ++k) {
      g.sigma(j, k) = beta.beta(pos++) - g.mu(j) * g.mu(k);
      g.sigma(k, j) = g.sigma(j, k);
    }
  }
  return g;
}

bool MvNormalFamily::in_space(const ExpectationPoint& beta) const {
  if (beta.beta.size() != dimension() || !beta.beta.allFinite()) return false;
  Eigen::LLT<Matrix> llt(to_params(beta).sigma);
  return llt.info() == Eigen::Success;
}

// alpha = n (P mu, -P_jj / 2 on the diagonal, -P_jk above it), P = Sigma^-1
CanonicalPoint MvNormalFamily::canonical(const ExpectationPoint& beta) const {
  const MvnParams g = to_params(beta);
  Eigen::LLT<Matrix> llt(g.sigma);
  if (llt.info() != Eigen::Success) throw DomainError("mvnormal: covariance not SPD");
  const Matrix prec = llt.solve(Matrix::Identity(d_, d_));
  Vector alpha(dimension());
  alpha.head(d_) = n_ * (prec * g.mu);
  Index pos = d_;
  for (int j = 0; j < d_; ++j) {
    for (int k = j; k < d_; ++k) alpha(pos++) = (j == k ? -0.5 : -1.0) * n_ * prec(j, k);
  }
  return {std::move(alpha)};
}

MvnParams MvNormalFamily::params_from_canonical(const CanonicalPoint& alpha) const {
  if (alpha.alpha.size() != dimension()) throw DomainError("mvnormal: alpha has wrong dimension");
  Matrix prec(d_, d_);
  Index pos = d_;
  for (int j = 0; j < d_; ++j) {
    for (int k = j; k < d_; ++k) {
      prec(j, k) = alpha.alpha(pos++) / ((j == k ? -0.5 : -1.0) * n_);
      prec(k, j) = prec(j, k);
    }
  }
  Eigen::LLT<Matrix> llt(prec);
  if (llt.info() != Eigen::Success) throw DomainError("mvnormal: canonical precision not SPD");
  Matrix sigma = llt.solve(Matrix::Identity(d_, d_));
  Vector mu = sigma * alpha.alpha.head(d_) / n_;
  return {std::move(mu), std::move(sigma)};
}

double MvNormalFamily::psi(const CanonicalPoint& alpha) const {
  const MvnParams g = params_from_canonical(alpha);
  const Vector eta = alpha.alpha.head(d_) / n_;
  return n_ * (0.5 * eta.dot(g.mu) + 0.5 * log_det_spd(g.sigma));
}

ExpectationPoint MvNormalFamily::mean(const CanonicalPoint& alpha) const {
  return to_beta(params_from_canonical(alpha));
}

// With y = mu + z and b = a + 2A mu, a'y + y'Ay has third cumulant
// 8 tr((A Sigma)^3) + 6 b' Sigma A Sigma b.
std::optional<double> MvNormalFamily::third_cumulant(const CanonicalPoint& alpha,
                                                     const Vector& v) const {
  if (v.size() != dimension()) throw ValidationError("mvnormal: direction has wrong dimension");
  const MvnParams g = params_from_canonical(alpha);
  const Vector a = v.head(d_);
  Matrix quad(d_, d_);
  Index pos = d_;
  for (int j = 0; j < d_; ++j) {
    for (int k = j; k < d_; ++k) {
      quad(j, k) = (j == k ? 1.0 : 0.5) * v(pos++);
      quad(k, j) = quad(j, k);
    }
  }
  const Vector b = a + 2.0 * quad * g.mu;
  const Matrix as = quad * g.sigma;
  const double k3 = 8.0 * (as * as * as).trace() + 6.0 * b.dot(g.sigma * quad * g.sigma * b);
  return k3 / (static_cast<double>(n_) * n_);
}

// Cov of the per-observation statistic T = (y, y_j y_k) by Isserlis, divided by n.
Matrix MvNormalFamily::covariance(const CanonicalPoint& alpha) const {
  const MvnParams g = params_from_canonical(alpha);
  const Vector& m = g.mu;
  const Matrix& s = g.sigma;
  std::vector<std::pair<int, int>> pairs;
  for (int j = 0; j < d_; ++j) {
    for (int k = j; k < d_; ++k) pairs.emplace_back(j, k);
  }
  const Index p = dimension();
  Matrix v(p, p);
  v.topLeftCorner(d_, d_) = s;
  for (int a = 0; a < d_; ++a) {
    for (std::size_t q = 0; q < pairs.size(); ++q) {
      const auto [b, c] = pairs[q];
      const double cov = m(b) * s(a, c) + m(c) * s(a, b);
      v(a, d_ + q) = cov;
      v(d_ + q, a) = cov;
    }
  }
  for (std::size_t q1 = 0; q1 < pairs.size(); ++q1) {
    const auto [a, b] = pairs[q1];
    for (std::size_t q2 = 0; q2 < pairs.size(); ++q2) {
      const auto [c, d] = pairs[q2];
      v(d_ + q1, d_ + q2) = s(a, c) * s(b, d) + s(a, d) * s(b, c) + m(a) * m(c) * s(b, d) +
                            m(a) * m(d) * s(b, c) + m(b) * m(c) * s(a, d) + m(b) * m(d) * s(a, c);
    }
  }
  return v / n_;
}

double MvNormalFamily::delta(const ExpectationPoint& beta, const MlePoint& mle) const {
  return mvn_delta(to_params(beta), to_params(mle.beta_hat), n_);
}

double MvNormalFamily::log_xi(const ExpectationPoint& beta, const MlePoint& mle) const {
  return mvn_log_xi(to_params(beta).sigma, to_params(mle.beta_hat).sigma);
}

double MvNormalFamily::log_density_ratio(const ExpectationPoint& num, const ExpectationPoint& den,
                                         const ExpectationPoint& at) const {
  return mvn_log_density_ratio(to_params(num), to_params(den), to_params(at), n_);
}

Matrix MvNormalFamily::sample_rows(const MvnParams& gamma, Rng& rng) const {
  Eigen::LLT<Matrix> llt(gamma.sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("mvnormal sample: Sigma not SPD");
  const Matrix chol = llt.matrixL();
  std::normal_distribution<double> normal;
  Matrix z(n_, d_);
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < d_; ++j) z(i, j) = normal(rng);
  }
  return (z * chol.transpose()).rowwise() + gamma.mu.transpose();
}

Replicate MvNormalFamily::sample(const MlePoint& mle, Rng& rng) const {
  const MvnParams draw = mvn_mle(sample_rows(to_params(mle.beta_hat), rng));
  Eigen::LLT<Matrix> llt(draw.sigma);
  if (llt.info() != Eigen::Success) throw NumericalError("mvnormal sample: bootstrap Sigma* singular");
  return replicate_at(to_beta(draw));
}

Vector MvNormalFamily::sample_data(const ExpectationPoint& beta, Rng& rng) const {
  const Matrix rows = sample_rows(to_params(beta), rng);
  Vector flat(rows.size());
  for (Index i = 0; i < rows.rows(); ++i) flat.segment(i * d_, d_) = rows.row(i).transpose();
  return flat;
}

}  // namespace bootbayes
