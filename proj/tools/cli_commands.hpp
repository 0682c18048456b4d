#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace evframe::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsageError = 1,
    kDataError = 2,
    kMismatch = 3,
};

/// Entry point shared by the binary and the tests. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}// namespace evframe::cli
