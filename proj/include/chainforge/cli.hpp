#pragma once

#include <iosfwd>

namespace chainforge::cli {

/// Exit codes: 0 all checks pass, 1 a check or computation failed, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace chainforge::cli
