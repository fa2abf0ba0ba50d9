#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace macpo::cli {

/// Entry point for the macpo tool: train, eval, verify, compare.
/// Returns the process exit code (2 for usage and configuration errors).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace macpo::cli
