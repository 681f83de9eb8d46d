#pragma once

// Command-line front end: demo, session, verify and scan.
//
// Exit codes: 0 success, 1 usage error, 2 bound violation, 3 I/O error.

#include <ostream>

namespace obliq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;
inline constexpr int kExitIo = 3;

/// Parses argv (argv[0] is the program name) and runs the command. Reports
/// and transcripts go to `out` unless --out names a file.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace obliq::cli
