#pragma once

namespace nonlin::harness {

/// Subcommands: solve, rates, delta, freeze, perturb, barrier, check.
/// Exit codes: 0 success, 1 assertion failure, 2 configuration error.
int cli_main(int argc, char** argv);

} // namespace nonlin::harness
