#include "bootbayes/datasets.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace bootbayes {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, const std::string& where) {
  const std::string t = trim(field);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ValidationError(where + ": non-numeric entry '" + t + "'");
  }
  if (used != t.size() || !std::isfinite(value)) {
    throw ValidationError(where + ": non-numeric entry '" + t + "'");
  }
  return value;
}

}  // namespace

ScoresDataset embedded_scores() {
  static const int mech[22] = {7,  44, 49, 59, 34, 46, 0,  32, 49, 52, 44,
                               36, 42, 5,  22, 18, 41, 48, 31, 42, 46, 63};
  static const int vec[22] = {51, 69, 41, 70, 42, 40, 40, 45, 57, 64, 61,
                              59, 60, 30, 58, 51, 63, 38, 42, 69, 49, 63};
  ScoresDataset data{Matrix(22, 2)};
  for (int i = 0; i < 22; ++i) {
    data.rows(i, 0) = mech[i];
    data.rows(i, 1) = vec[i];
  }
  return data;
}

ScoresDataset load_scores(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scores file " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "mech,vec") {
    throw ValidationError(path.string() + ": expected header 'mech,vec'");
  }
  std::vector<std::pair<double, double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto comma = line.find(',');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw ValidationError(where + ": expected two comma-separated fields");
    }
    rows.emplace_back(parse_number(line.substr(0, comma), where),
                      parse_number(line.substr(comma + 1), where));
  }
  if (rows.empty()) throw ValidationError(path.string() + ": no data rows");
  ScoresDataset data{Matrix(static_cast<Index>(rows.size()), 2)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    data.rows(static_cast<Index>(i), 0) = rows[i].first;
    data.rows(static_cast<Index>(i), 1) = rows[i].second;
  }
  return data;
}

ZValueDataset load_zvalues(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open z-value file " + path.string());
  std::vector<double> values;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    values.push_back(parse_number(line, path.string() + ":" + std::to_string(lineno)));
  }
  if (values.empty()) throw ValidationError(path.string() + ": empty z-value file");
  return {Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()))};
}

Vector BinSpec::centers() const {
  Vector c(count);
  for (int j = 0; j < count; ++j) c(j) = first_center + j * width;
  return c;
}

BinnedCounts bin_zvalues(const Vector& z, const BinSpec& spec) {
  if (spec.count < 1 || !(spec.width > 0.0)) throw ValidationError("bin spec needs count >= 1, width > 0");
  BinnedCounts out{Vector::Zero(spec.count), spec.centers(), 0};
  const double lo = spec.lower_edge();
  const double hi = spec.upper_edge();
  for (Index k = 0; k < z.size(); ++k) {
    const double v = z(k);
    // Edges are decimal values; the small offset lets an exact edge land in the upper bin.
    const double pos = (v - lo) / spec.width + 1e-9;
    if (v < lo - 1e-12 || v > hi + 1e-12) {
      ++out.out_of_range;
      continue;
    }
    const int j = std::min(static_cast<int>(std::floor(pos)), spec.count - 1);
    if (j < 0) {
      ++out.out_of_range;
      continue;
    }
    out.counts(j) += 1.0;
  }
  return out;
}

}  // namespace bootbayes
