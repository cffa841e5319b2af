#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace onom {

/// Runs the command-line tool. Returns the process exit code: 0 on success,
/// 2 for usage errors and unreadable or invalid inputs, 1 when a pipeline
/// stage fails. Diagnostics go to err as "[stage] message".
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with arguments excluding the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace onom
