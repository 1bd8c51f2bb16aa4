#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mflqg::cli {

// Exit codes: 0 success, 1 invalid input or usage, 2 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitNumerical = 2;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace mflqg::cli
