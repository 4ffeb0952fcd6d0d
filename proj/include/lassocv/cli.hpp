#pragma once

#include <iosfwd>

namespace lassocv {

// Entry point of the lassocv tool. Returns 0 on success, 1 on input errors (including
// usage errors), 2 on internal errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lassocv
