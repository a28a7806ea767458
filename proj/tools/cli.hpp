#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rrls::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kUsage = 2;
inline constexpr int kNumerical = 3;
inline constexpr int kVerifyFailed = 4;

/// Runs `rrls <subcommand> ...`; args excludes the program name. Metrics go
/// to `out` as JSON lines, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rrls::cli
