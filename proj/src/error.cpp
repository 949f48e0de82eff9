// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/error.hpp"

namespace larvacount {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::DuplicateImageId: return "DuplicateImageId";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::BadDensity: return "BadDensity";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedPayload: return "TruncatedPayload";
    case ErrorCode::MaxvalNot255: return "MaxvalNot255";
    case ErrorCode::TargetTooLarge: return "TargetTooLarge";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::DegenerateBox: return "DegenerateBox";
    case ErrorCode::InconsistentCounts: return "InconsistentCounts";
    case ErrorCode::NoGroundTruth: return "NoGroundTruth";
    case ErrorCode::MissingDensity: return "MissingDensity";
    case ErrorCode::NonFiniteResult: return "NonFiniteResult";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::SingularNormalEquations: return "SingularNormalEquations";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message, std::size_t line)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), line_(line) {}

}  // namespace larvacount
