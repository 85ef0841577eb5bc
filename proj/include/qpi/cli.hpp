// cli.hpp: Command-line front end: run, compare and diagnose

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qpi::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,        // failed diagnostic check, comparison or I/O error
    kConfigError = 2,    // schema violation or bad command line
    kNumericalError = 3,
};

// Entry point used by the `qpi` executable; args exclude the program name.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version();

} // namespace qpi::cli
