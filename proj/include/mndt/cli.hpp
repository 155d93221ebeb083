#pragma once

#include <iosfwd>
#include <string>
#include <vector>

/// Command-line front end: gen-scenario, allocate, sleep and report.
namespace mndt::cli {

enum ExitCode : int {
    kOk = 0,
    kInternalError = 1,
    kInvalidFlags = 2,
    kWriteFailure = 3,
    kConstraintViolation = 4,
    kMissingInputs = 5,
};

/// Runs one command. `args` excludes the program name. Normal output goes to
/// `out`, diagnostics to `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

} // namespace mndt::cli
