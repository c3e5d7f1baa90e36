#pragma once

#include <iosfwd>

namespace lipsum::cli {

/// Exit codes: 0 success, 1 a failed property in `verify`, 2 bad input.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lipsum::cli
