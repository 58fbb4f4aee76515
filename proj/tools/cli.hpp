#pragma once

#include <iosfwd>

namespace clip {

/// Entry point of the `clip` tool. Returns 0 on success, 2 on usage errors
/// and 1 when the command itself fails.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace clip
