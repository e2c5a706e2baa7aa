#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace apslda {

// Entry point shared by the binary and the tests. argv excludes the program
// name. Returns the process exit code: 0 success, 1 configuration/parse
// error, 2 transport failure.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace apslda
