#pragma once

#include <iosfwd>

namespace lookahead::cli {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,   ///< bad usage, config, or data validation
    kExitRuntime = 2,  ///< a run failed
};

/// Entry point for `lookahead validate|run|bench`. Writes human output to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lookahead::cli
