// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gi::cli {

/// Runs the `gi` command line with `args` (program name excluded). Tables go
/// to `out`, diagnostics to `err`. Returns the process exit code: 0 on
/// success, 1 when a check fails or a run errors, 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gi::cli
