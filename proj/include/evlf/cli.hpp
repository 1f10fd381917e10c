#pragma once

#include <string>
#include <vector>

namespace evlf {

/// Entry point for the `evlf` tool; args excludes argv[0]. Returns the
/// process exit code (0 ok, 2 config error, 3 data error, 4 numerical
/// failure).
int run_cli(const std::vector<std::string>& args);

}  // namespace evlf
