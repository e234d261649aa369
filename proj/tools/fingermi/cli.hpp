#pragma once

#include <ostream>

namespace fingermi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Parses argv and dispatches one verb (synth, preprocess, train, cv, sweep,
/// stats, report). Returns 0 on success, 2 for usage errors (unknown verb or
/// flag, missing required flag) and 1 for runtime failures, which are
/// reported as a single "error: ..." line on `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fingermi::cli
