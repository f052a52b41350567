#pragma once

#include <ostream>

#include "asv5/error.hpp"

namespace asv5::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitParse = 3;  // also unreadable or unwritable files
inline constexpr int kExitProtocol = 4;
inline constexpr int kExitDegenerate = 5;

int ExitCode(ErrorKind kind);

// Entry point of the asv5eval tool. Output goes to `out`, diagnostics to
// `err`; the return value is the process exit code.
int Run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

}  // namespace asv5::cli
