#pragma once

#include <iosfwd>

namespace pdswitch {

/// Entry point of the command-line tool. Exit codes: 0 success,
/// 1 inconclusive but valid (uncertified model, no gain found, unusable
/// estimate), 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pdswitch
