// Copyright (C) 2026 The TimeTuner Lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace timetuner::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kNumericError = 3,
    kContractError = 4,
};

/// Entry point of the `timetuner` tool. args[0] is the program name.
/// Subcommands: tune, sample, gap, sweep, eval.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace timetuner::cli
