#ifndef BOOTBAYES_STORE_HPP
#define BOOTBAYES_STORE_HPP

#include "bootbayes/sampler.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace bootbayes {

// Replication store: one `#`-prefixed JSON metadata line, then a CSV with header
// rep,beta_1..beta_p,alpha_1..alpha_p,delta,log_xi[,log_proposal],t_<id>...
// Alpha columns are absent for families without canonical coordinates and the
// log_proposal column appears only for non-standard proposals. Floats use 17
// significant digits, so a reload reproduces every double bit for bit.

// K: outer replications requested alongside the run, recorded for provenance only.
void write_store(const BootstrapRun& run, std::ostream& out, Index K = 0);
void write_store(const BootstrapRun& run, const std::filesystem::path& path, Index K = 0);

BootstrapRun read_store(std::istream& in);
BootstrapRun read_store(const std::filesystem::path& path);

/// FNV-1a 64-bit digest of the file bytes, hex encoded.
std::string file_digest(const std::filesystem::path& path);

}  // namespace bootbayes

#endif  // BOOTBAYES_STORE_HPP
