#ifndef BOOTBAYES_NUMERICS_HPP
#define BOOTBAYES_NUMERICS_HPP

#include "bootbayes/core.hpp"

#include <cmath>
#include <functional>
#include <numbers>

namespace bootbayes {

inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

inline double log_normal_pdf(double z) {
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// Standard normal cdf via erfc; accurate in both tails.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Inverse standard normal cdf. Throws DomainError outside (0, 1).
double normal_quantile(double p);

/// log|A| for a symmetric positive definite matrix through its Cholesky factor.
/// Cholesky failure is the definition of "numerically singular".
template <typename Derived>
double log_det_spd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::LLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("matrix is not numerically positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

/// Adaptive Gauss-Kronrod quadrature of f over [a, b] (b may be +inf).
double integrate(const std::function<double(double)>& f, double a, double b,
                 double abs_tol = 1e-12, double rel_tol = 1e-10);

/// Bisection for a sign change of f on [lo, hi]; stops when the bracket is narrower than tol.
double bisect(const std::function<double(double)>& f, double lo, double hi, double tol);

/// log(sum(exp(x))) with the max shift.
double log_sum_exp(const Vector& x);

}  // namespace bootbayes

#endif  // BOOTBAYES_NUMERICS_HPP
