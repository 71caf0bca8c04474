#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pretex {

// Entry point behind main(), callable in-process from tests.
// args excludes the program name. Exit codes: 0 success, 1 configuration
// problem, 2 generation failure, 3 evaluation failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pretex
