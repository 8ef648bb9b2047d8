#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace eqr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `eqr` binary; `args` excludes the program name.
/// Subcommands: ingest, metrics, report, query, evaluate, stability, version.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eqr::cli
