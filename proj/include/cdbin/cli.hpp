#pragma once

#include <string>
#include <vector>

namespace cdbin::cli {

/// Dispatches the toolkit subcommands. Exit codes: 0 success, 1 usage error,
/// 2 runtime failure.
int run(int argc, const char* const* argv);

/// Convenience overload for in-process invocation.
int run(const std::vector<std::string>& args);

} // namespace cdbin::cli
