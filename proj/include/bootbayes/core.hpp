#ifndef BOOTBAYES_CORE_HPP
#define BOOTBAYES_CORE_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace bootbayes {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

inline constexpr const char* kVersion = "0.1.0";

/// A point outside a family's parameter or expectation space.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Numerical breakdown: singular covariance, non-convergence, weight underflow.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input (flags, file contents, argument shapes).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Library-wide tolerances shared with the test suite.
namespace tol {
inline constexpr double kRoundTrip = 1e-10;
inline constexpr double kDeviationIdentity = 1e-9;
inline constexpr double kDevianceSlack = 1e-10;
inline constexpr double kWeightSum = 1e-12;
}  // namespace tol

/// Canonical parameter alpha of an exponential family.
struct CanonicalPoint {
  Vector alpha;
};

/// Expectation parameter beta = E_alpha{beta_hat}.
struct ExpectationPoint {
  Vector beta;
};

/// Maximum likelihood point with its canonical image and covariance.
/// Families without canonical coordinates leave alpha_hat and v_hat empty.
struct MlePoint {
  ExpectationPoint beta_hat;
  CanonicalPoint alpha_hat;
  Matrix v_hat;
};

/// One bootstrap draw: the sufficient statistic and, where defined, its canonical image.
struct Replicate {
  ExpectationPoint beta;
  CanonicalPoint alpha;
};

}  // namespace bootbayes

#endif  // BOOTBAYES_CORE_HPP
