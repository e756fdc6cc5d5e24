#pragma once

// Command-line front ends. Arguments exclude the program name.
// Exit codes: 0 success, 1 user error (bad flags, files, inputs), 2 internal error.

#include <ostream>
#include <string>
#include <vector>

namespace ptm::cli {

// ptm build | run | evolve | compile | export | inspect
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// lopro compile | describe
int lopro_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ptm::cli
