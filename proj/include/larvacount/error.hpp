// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace larvacount {

enum class ErrorCode {
    MalformedLine,
    OutOfRange,
    DuplicateImageId,
    MissingColumn,
    BadDensity,
    MalformedRow,
    UnsupportedFormat,
    TruncatedPayload,
    MaxvalNot255,
    TargetTooLarge,
    EmptyDataset,
    DegenerateBox,
    InconsistentCounts,
    NoGroundTruth,
    MissingDensity,
    NonFiniteResult,
    InsufficientData,
    SingularNormalEquations,
    NonConvergence,
    ZeroVariance,
    InvalidArgument,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Domain error carrying a machine-readable code. `line()` is the 1-based
/// input line for parse errors and 0 otherwise.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::size_t line = 0);

    ErrorCode code() const noexcept { return code_; }
    std::size_t line() const noexcept { return line_; }

private:
    ErrorCode code_;
    std::size_t line_;
};

}  // namespace larvacount
