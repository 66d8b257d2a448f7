#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rbiga {

/// Batch driver behind the rbiga executable. Returns the process exit code:
/// 0 on success, 1 on validation or certification failure, 2 on usage errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "3,2,5" -> {3, 2, 5}.
std::vector<double> parse_mu(const std::string& text);

} // namespace rbiga
