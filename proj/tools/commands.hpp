#pragma once

#include <ostream>

#include "run_config.hpp"

namespace covq::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kValidation = 2, kNonConvergence = 3, kOracleFailure = 4 };

int cmd_chi2(const RunConfig& cfg, std::ostream& out);
int cmd_rate_sweep(const RunConfig& cfg, std::ostream& out);
int cmd_simulate(const RunConfig& cfg, std::ostream& out);
int cmd_verify(const RunConfig& cfg, std::ostream& out);
int cmd_nogo(const RunConfig& cfg, std::ostream& out);
int cmd_covertness(const RunConfig& cfg, std::ostream& out);

// Parses argv, loads the config, runs the subcommand. Errors are reported to
// `err` as a one-line JSON record and mapped to an exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace covq::cli
