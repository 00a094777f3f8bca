#ifndef RELAXLAB_CLI_HPP
#define RELAXLAB_CLI_HPP

#include <iosfwd>

namespace relaxlab::cli {

enum ExitCode : int { kOk = 0, kAssertion = 1, kInput = 2, kResource = 3 };

inline constexpr const char* kToolVersion = "0.1.0";

/// Entry point of the relaxlab tool; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace relaxlab::cli

#endif  // RELAXLAB_CLI_HPP
