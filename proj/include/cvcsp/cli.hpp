#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cvcsp::cli {

/// Exit codes: 0 success, 1 negative verdict (NP-hard, infeasible,
/// violation), 2 input error, 3 budget exhausted / unknown.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace cvcsp::cli
