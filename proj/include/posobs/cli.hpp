#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace posobs::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kSynthesisFailed = 3,
  kSimulationAborted = 4,
};

/// Entry point shared by the executable and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Relative output paths are placed under $POSOBS_OUTPUT_DIR when it is set.
std::string resolve_output_path(const std::string& path);

}  // namespace posobs::cli
