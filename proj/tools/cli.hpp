#pragma once

#include <iosfwd>

namespace crnet {

/// Entry point of the `crnet` command. Returns the process exit code:
/// 0 success, 1 runtime failure (I/O, checksum, divergence, failed check), 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crnet
