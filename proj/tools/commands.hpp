// Copyright 2026 The tonelink Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tonelink::cli {

/// Runs the tonelink command line with `args` (program name excluded).
/// Returns the process exit status; diagnostics go to `err` as one line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tonelink::cli
