#pragma once

namespace cco {

// Subcommands: gen, sa, train-sl, train-s2c, eval, transfer, report.
// Returns the process exit status; never throws.
int run_cli(int argc, const char* const* argv);

}  // namespace cco
