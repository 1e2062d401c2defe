#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mcfs::cli {

enum ExitCode : int {
  kOk = 0,
  kPropertyViolated = 1,
  kInvalidInput = 2,
  kNumericalFailure = 3,
};

/// Runs one subcommand; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace mcfs::cli
