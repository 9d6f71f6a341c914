// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace patternpress {

// Runs the command line `patternpress <args...>` (args excludes the program
// name). Returns 0 on success, 1 on usage or validation errors and 2 on I/O
// errors. Diagnostics go to err.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace patternpress
