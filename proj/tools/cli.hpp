#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace riskclt::cli {

/// Runs the riskclt command line. `args` excludes the program name.
/// Returns 0 on success, 2 on usage or validation errors (one diagnostic line
/// on `err`), 1 on runtime failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Help text of a subcommand (or of the top-level app when `subcommand` is
/// empty), exactly as `--help` prints it.
std::string help_text(const std::string& subcommand);

/// Every subcommand name, in registration order.
std::vector<std::string> subcommands();

}  // namespace riskclt::cli
