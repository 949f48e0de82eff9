// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>

namespace larvacount::cli {

enum ExitCode : int {
    kSuccess = 0,
    kDomainError = 1,
    kUsageError = 2,
};

/// Runs the `larvacount` command line. Reports go to `out`, diagnostics to
/// `err`. Returns an ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace larvacount::cli
