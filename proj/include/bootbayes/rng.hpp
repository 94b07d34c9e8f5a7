#ifndef BOOTBAYES_RNG_HPP
#define BOOTBAYES_RNG_HPP

#include <cstdint>
#include <random>

namespace bootbayes {

/// Generator behind every replication substream. Reproducibility is promised per build:
/// the std distributions layered on top are implementation-defined.
using Rng = std::mt19937_64;

/// Outer bootstrap-after-bootstrap draws live in a disjoint index domain.
inline constexpr std::uint64_t kOuterStreamOffset = std::uint64_t{1} << 63;

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Substream for replication `index`: a pure function of (master_seed, index).
inline Rng substream(std::uint64_t master_seed, std::uint64_t index) {
  const std::uint64_t mixed = splitmix64(splitmix64(master_seed) ^ splitmix64(~index));
  std::seed_seq seq{static_cast<std::uint32_t>(mixed), static_cast<std::uint32_t>(mixed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

}  // namespace bootbayes

#endif  // BOOTBAYES_RNG_HPP
