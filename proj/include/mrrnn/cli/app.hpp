#pragma once

#include <iosfwd>

namespace mrrnn::cli {

/// Entry point of the `mrrnn` tool. Returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mrrnn::cli
