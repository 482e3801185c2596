#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rewardrig::cli {

enum ExitCode : int { ok = 0, verification_failure = 1, parse_error = 2, io_error = 3 };

/// Runs the rewardrig command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rewardrig::cli
