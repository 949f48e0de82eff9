// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "larvacount/annotations.hpp"
#include "larvacount/evaluation.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace larvacount::counting {

/// Pond volume over photographed volume (6 L sampled from ~100 L).
inline constexpr double kDefaultVolumeFactor = 16.6;

struct CountRecord {
    std::string image_id;
    std::size_t predicted_count = 0;
    std::optional<std::size_t> true_count;
};

struct PondEstimate {
    std::size_t sampled_count = 0;
    double volume_factor = kDefaultVolumeFactor;
    double estimated_total = 0.0;
};

/// Counts predictions with confidence >= threshold (inclusive).
CountRecord count_image(const ImageAnnotation& annotation, double confidence_threshold,
                        bool has_ground_truth = true);

/// estimated_total = sampled_count * volume_factor. Throws
/// Error{InvalidArgument} for a non-positive factor.
PondEstimate extrapolate_pond(std::size_t sampled_count, double volume_factor = kDefaultVolumeFactor);

struct DensityRow {
    int density = 0;
    std::size_t num_images = 0;
    double mean_counting_accuracy = 0.0;
    double mean_ap = 0.0;
};

struct DensityReport {
    std::vector<DensityRow> rows;  // ascending density
    /// Set when mean counting accuracy strictly decreases with density.
    bool accuracy_decreases_with_density = false;
};

/// Per-density arithmetic means. Throws Error{MissingDensity} when an image
/// has no density group.
DensityReport density_summary(std::span<const evaluation::ImageReport> images);

/// True when values strictly decrease along the sequence (vacuous for < 2).
bool strictly_decreasing(std::span<const double> values) noexcept;

inline constexpr std::string_view kCountCsvHeader =
    "image_id,predicted_count,true_count,estimated_total";
inline constexpr std::string_view kDensityCsvHeader =
    "density,num_images,mean_counting_accuracy,mean_ap";

std::string count_csv(std::span<const CountRecord> records,
                      double volume_factor = kDefaultVolumeFactor);
std::string density_csv(const DensityReport& report);

}  // namespace larvacount::counting
