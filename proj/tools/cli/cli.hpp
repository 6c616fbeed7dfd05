#pragma once

#include <string>
#include <vector>

namespace r2d2surv::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kDataError = 2,
    kChainError = 3,
};

// Version tag written into every JSON output.
inline constexpr int kSchemaVersion = 1;

/// Run the command line with arguments excluding the program name.
int run(const std::vector<std::string>& args);
int run(int argc, char** argv);

}  // namespace r2d2surv::cli
