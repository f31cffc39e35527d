#pragma once

#include <string>
#include <vector>

namespace carmm::cli {

// Full command-line entry point: parses argv (program name excluded),
// dispatches to the simulate / fit / diagnose / compare / cluster pipelines.
// Exit codes: 0 ok, 2 argument errors, 3 data validation errors, 4 numerical
// failure.
int run(const std::vector<std::string>& args);

}  // namespace carmm::cli
