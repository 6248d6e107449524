#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ood::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

/// Runs one invocation. `args` excludes the program name. Diagnostics go to
/// `err`; summaries go to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ood::cli
