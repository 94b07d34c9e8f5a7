#include "bootbayes/store.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace bootbayes {

namespace {

using nlohmann::json;

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from(const json& a) {
  Vector v(static_cast<Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Index>(i)) = a[i].get<double>();
  return v;
}

json matrix_json(const Matrix& m) {
  json a = json::array();
  for (Index r = 0; r < m.rows(); ++r) a.push_back(vector_json(m.row(r).transpose()));
  return a;
}

Matrix matrix_from(const json& a) {
  const Index rows = static_cast<Index>(a.size());
  const Index cols = rows > 0 ? static_cast<Index>(a[0].size()) : 0;
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) m.row(r) = vector_from(a[static_cast<std::size_t>(r)]).transpose();
  return m;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  return out;
}

double parse_field(const std::string& s, Index row) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ValidationError("replication store row " + std::to_string(row) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

void write_store(const BootstrapRun& run, std::ostream& out, Index K) {
  const Index p = run.beta.cols();
  const Index q = run.alpha.cols();
  const bool with_proposal = run.proposal != ProposalKind::standard;
  json meta = {
      {"family_id", run.family_id},
      {"B", run.size()},
      {"master_seed", run.master_seed},
      {"seed", run.master_seed},
      {"K", K},
      {"version", kVersion},
      {"proposal_tag", to_string(run.proposal)},
      {"direct_density", run.direct_density},
      {"rejected", run.rejected},
      {"p", p},
      {"mle",
       {{"beta_hat", vector_json(run.mle.beta_hat.beta)},
        {"alpha_hat", vector_json(run.mle.alpha_hat.alpha)},
        {"v_hat", matrix_json(run.mle.v_hat)}}},
  };
  out << '#' << meta.dump() << '\n';
  out << "rep";
  for (Index j = 0; j < p; ++j) out << ",beta_" << j + 1;
  for (Index j = 0; j < q; ++j) out << ",alpha_" << j + 1;
  out << ",delta,log_xi";
  if (with_proposal) out << ",log_proposal";
  for (const auto& id : run.stat_ids) out << ",t_" << id;
  out << '\n';
  for (Index i = 0; i < run.size(); ++i) {
    out << i;
    for (Index j = 0; j < p; ++j) out << ',' << fmt17(run.beta(i, j));
    for (Index j = 0; j < q; ++j) out << ',' << fmt17(run.alpha(i, j));
    out << ',' << fmt17(run.delta(i)) << ',' << fmt17(run.log_xi(i));
    if (with_proposal) out << ',' << fmt17(run.log_proposal(i));
    for (Index s = 0; s < run.stats.cols(); ++s) out << ',' << fmt17(run.stats(i, s));
    out << '\n';
  }
}

void write_store(const BootstrapRun& run, const std::filesystem::path& path, Index K) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write replication store " + path.string());
  write_store(run, out, K);
}

BootstrapRun read_store(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') {
    throw ValidationError("replication store: missing '#' metadata line");
  }
  json meta;
  try {
    meta = json::parse(line.substr(1));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("replication store: bad metadata: ") + e.what());
  }
  BootstrapRun run;
  run.family_id = meta.at("family_id").get<std::string>();
  run.master_seed = meta.at("master_seed").get<std::uint64_t>();
  run.proposal = proposal_from_string(meta.at("proposal_tag").get<std::string>());
  run.direct_density = meta.value("direct_density", false);
  run.rejected = meta.value("rejected", Index{0});
  run.mle.beta_hat.beta = vector_from(meta.at("mle").at("beta_hat"));
  run.mle.alpha_hat.alpha = vector_from(meta.at("mle").at("alpha_hat"));
  run.mle.v_hat = matrix_from(meta.at("mle").at("v_hat"));
  const Index B = meta.at("B").get<Index>();
  const Index p = meta.at("p").get<Index>();

  if (!std::getline(in, line)) throw ValidationError("replication store: missing header");
  const auto header = split_csv(line);
  Index q = 0;
  bool with_proposal = false;
  for (const auto& h : header) {
    if (h.rfind("alpha_", 0) == 0) ++q;
    if (h == "log_proposal") with_proposal = true;
    if (h.rfind("t_", 0) == 0) run.stat_ids.push_back(h.substr(2));
  }
  const std::size_t expected = 1 + static_cast<std::size_t>(p + q) + 2 + (with_proposal ? 1 : 0) +
                               run.stat_ids.size();
  if (header.size() != expected) throw ValidationError("replication store: malformed header");

  run.beta.resize(B, p);
  run.alpha.resize(B, q);
  run.delta.resize(B);
  run.log_xi.resize(B);
  run.log_proposal = Vector::Zero(B);
  run.stats.resize(B, static_cast<Index>(run.stat_ids.size()));
  for (Index i = 0; i < B; ++i) {
    if (!std::getline(in, line)) throw ValidationError("replication store: truncated at row " + std::to_string(i));
    const auto f = split_csv(line);
    if (f.size() != expected) throw ValidationError("replication store: wrong field count at row " + std::to_string(i));
    std::size_t c = 1;
    for (Index j = 0; j < p; ++j) run.beta(i, j) = parse_field(f[c++], i);
    for (Index j = 0; j < q; ++j) run.alpha(i, j) = parse_field(f[c++], i);
    run.delta(i) = parse_field(f[c++], i);
    run.log_xi(i) = parse_field(f[c++], i);
    if (with_proposal) run.log_proposal(i) = parse_field(f[c++], i);
    for (Index s = 0; s < run.stats.cols(); ++s) run.stats(i, s) = parse_field(f[c++], i);
  }
  return run;
}

BootstrapRun read_store(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open replication store " + path.string());
  return read_store(in);
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char c;
  while (in.get(c)) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace bootbayes
