#ifndef BOOTBAYES_STATISTIC_HPP
#define BOOTBAYES_STATISTIC_HPP

#include "bootbayes/core.hpp"

#include <functional>
#include <string>

namespace bootbayes {

/// A named parameter of interest t(beta), evaluated on every replicate during generation.
struct Statistic {
  std::string id;
  std::function<double(const Replicate&)> fn;

  double operator()(const Replicate& r) const { return fn(r); }
};

/// t(beta) = beta_j (zero based).
inline Statistic coordinate_statistic(Index j) {
  return Statistic{"beta_" + std::to_string(j + 1),
                   [j](const Replicate& r) { return r.beta.beta(j); }};
}

}  // namespace bootbayes

#endif  // BOOTBAYES_STATISTIC_HPP
