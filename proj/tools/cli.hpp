#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sfd::cli {

/// Exit codes: 0 success, 1 failure reported by the library, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sfd::cli
