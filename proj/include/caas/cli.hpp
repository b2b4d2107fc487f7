#pragma once

#include <string>
#include <vector>

namespace caas::cli {

// "start..end:step" (step defaults to 1). Throws ErrorKind::Parse.
std::vector<int> parse_ue_range(const std::string& expr);

// Exit codes: 0 success, 1 validation error, 2 I/O error.
int run_cli(int argc, char** argv);

}  // namespace caas::cli
