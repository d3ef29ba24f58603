/// @file cli.h
/// @brief `artqa` command-line entry point.
///
/// Exit codes: 0 success, 1 usage error (or invalid corpus for `validate`),
/// 2 backend failure, 3 corpus validation failure.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace artqa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitBackend = 2;
inline constexpr int kExitValidation = 3;

/// `args` excludes the program name. Tables and answers go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace artqa::cli
