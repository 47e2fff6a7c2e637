#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oscomp::cli {

/// Exit codes: 0 success, 1 configuration error, 2 diverged-run truncation.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

/// Fast embedded verification suite (gain identity, energy balance,
/// detector accuracy). `perturb_gain` is a test hook added to the gain
/// constant; nonzero values must fail the suite.
int cmd_check(double perturb_gain, std::ostream& out);

}  // namespace oscomp::cli
