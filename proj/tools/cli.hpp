#pragma once

#include <string>
#include <vector>

namespace pigflow::cli {

/// Entry point shared by the binary and the integration tests.
/// Returns the process exit status; failures print one-line
/// diagnostics to stderr.
int run_cli(const std::vector<std::string>& args);

} // namespace pigflow::cli
