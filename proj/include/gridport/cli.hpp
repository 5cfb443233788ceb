#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridport {

/// Command-line front end.  `args` excludes the program name.  Returns the
/// process exit code: 0 on success, 2 for configuration or usage errors, 3 for
/// numerical failures (including diverged simulations), 4 when a requested
/// stability index is inapplicable.  All human-readable notes go to `err`;
/// `out` carries command results that are not written to files.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridport
