#pragma once

#include <iosfwd>

namespace simulmt {

/// Entry point of the `simulmt` tool. Machine output goes to `out`, human
/// summaries and diagnostics to `err`. Returns 0 on success, 1 on usage
/// errors, 2 on data errors.
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace simulmt
