#pragma once

#include <string>
#include <vector>

#include "addkit/spectral.hpp"
#include "addkit/symbol_core.hpp"

namespace addkit {

/// Exit codes of the command line.
enum ExitCode : int { exit_pass = 0, exit_check_failure = 1, exit_config_error = 2 };

/// Runs the `addkit` command line (argv[0] is the program name).
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

/// "builtin:<name>", a path to a JSON family config, or an inline JSON object.
/// Throws Error(config).
SymbolFamily family_from_spec(const std::string& spec);

/// "N=4096,L=auto" or "N=512,L=20"; missing keys keep the defaults of the
/// dimension. Throws Error(config).
GridSpec parse_grid(const std::string& text, int dimension);

}  // namespace addkit
