#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace georef {

enum ExitCode : int {
    kExitOk = 0,
    kExitEmpty = 1,     // empty or degenerate result
    kExitConfig = 2,    // bad arguments, configuration or input files
    kExitUpstream = 3,  // model endpoint, gazetteer or NER service failure
};

/// Runs the georef command line. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv);

}  // namespace georef
