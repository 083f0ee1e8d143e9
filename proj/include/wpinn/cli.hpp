#pragma once

#include <iosfwd>

namespace wpinn {

/// Parses argv and runs one command. Returns 0 on success, 2 on usage or
/// configuration errors, 1 on runtime failures.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wpinn
