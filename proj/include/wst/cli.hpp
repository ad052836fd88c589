// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The wstlid Authors

#pragma once

#include <iosfwd>

namespace wst::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kMalformed = 2,      ///< unreadable or malformed input
  kNothingToDo = 3,    ///< no processable input files
  kMisaligned = 4,     ///< score files disagree on trials
};

/// Entry point of the wstlid tool: extract, train, score, eval, fuse.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wst::cli
