#pragma once

#include <iostream>

namespace spinmix {

enum ExitStatus : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_numerical = 2,
    exit_partial = 3,
};

/// Entry point of the spinmix command-line tool. Subcommands: simulate,
/// ensemble, spectrum, groundstate, bloch2, params, steadystate.
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
             std::ostream& err = std::cerr);

}  // namespace spinmix
