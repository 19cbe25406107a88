#pragma once

#include <ostream>

namespace hmax::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage error. Failures print a
/// single `error: <class>: <message>` line to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hmax::cli
