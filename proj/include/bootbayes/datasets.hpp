#ifndef BOOTBAYES_DATASETS_HPP
#define BOOTBAYES_DATASETS_HPP

#include "bootbayes/core.hpp"

#include <filesystem>

namespace bootbayes {

/// Two test scores (mechanics, vectors) per student, one row per student.
struct ScoresDataset {
  Matrix rows;
};

/// The 22-student mechanics/vectors fixture.
ScoresDataset embedded_scores();

/// CSV with header `mech,vec`.
ScoresDataset load_scores(const std::filesystem::path& path);

struct ZValueDataset {
  Vector z;
};

/// One decimal value per line; blank lines ignored.
ZValueDataset load_zvalues(const std::filesystem::path& path);

/// Equal-width histogram bins given by their centers. Bin j covers
/// [center_j - width/2, center_j + width/2), the last bin closed on the right.
struct BinSpec {
  double first_center = -4.4;
  double width = 0.2;
  int count = 49;

  Vector centers() const;
  double lower_edge() const { return first_center - 0.5 * width; }
  double upper_edge() const { return first_center + (count - 0.5) * width; }
};

struct BinnedCounts {
  Vector counts;
  Vector centers;
  Index out_of_range = 0;
};

BinnedCounts bin_zvalues(const Vector& z, const BinSpec& spec);

}  // namespace bootbayes

#endif  // BOOTBAYES_DATASETS_HPP
