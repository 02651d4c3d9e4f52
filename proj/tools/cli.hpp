#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aedp::cli {

enum ExitCode : int { ok = 0, usage_error = 1, data_error = 2 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aedp::cli
