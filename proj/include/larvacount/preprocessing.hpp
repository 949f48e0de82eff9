// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "larvacount/annotations.hpp"
#include "larvacount/raster.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace larvacount::preprocessing {

struct Transformed {
    RasterImage image;
    ImageAnnotation annotation;
};

/// Clipped boxes smaller than this fraction of the crop area are dropped.
inline constexpr double kMinClippedAreaFraction = 1e-6;

/// Crops a target_w x target_h window anchored at the frame center
/// (offset = floor((size - target) / 2)). Boxes are translated, clipped to
/// the window and renormalized; near-empty remainders are dropped.
/// Throws Error{TargetTooLarge} when the window exceeds the frame.
Transformed center_crop(const RasterImage& image, const ImageAnnotation& annotation, int target_w,
                        int target_h);
/// Annotation-only variant, using the annotation's own dimensions.
ImageAnnotation center_crop(const ImageAnnotation& annotation, int target_w, int target_h);

/// Blackens every pixel (x, y) with (x - cx)^2 + (y - cy)^2 > r^2.
RasterImage circular_mask(const RasterImage& image, double center_x_px, double center_y_px,
                          double radius_px);

/// q-quantile of normalized box areas, linear interpolation between order
/// statistics at rank (n - 1) q. Throws Error{EmptyDataset}.
double area_quantile(std::span<const LabeledBox> boxes, double q);

enum class EnlargeMode {
    /// w and h each multiplied by f = T / A; area becomes T^2 / A.
    Literal,
    /// w and h each multiplied by sqrt(f); area becomes exactly T.
    Normalize,
};

struct EnlargeConfig {
    double threshold_area = 0.0;
    EnlargeMode mode = EnlargeMode::Literal;
};

/// Boxes with area below the threshold grow about their center; growth that
/// would leave the unit square is shrunk symmetrically to fit.
std::vector<LabeledBox> enlarge_small_boxes(std::span<const LabeledBox> boxes,
                                            const EnlargeConfig& config);
/// Applies enlargement to the ground truth; predictions are left alone.
ImageAnnotation enlarge_small_boxes(const ImageAnnotation& annotation, const EnlargeConfig& config);

struct NoiseConfig {
    double variance = 0.0;  // squared 8-bit intensity units
    std::uint64_t seed = 0;
};

/// Standard normal deviate for position `index` of the stream keyed by
/// `seed` (SplitMix64 counter, Box-Muller). Pure function of its arguments.
double standard_normal(std::uint64_t seed, std::uint64_t index) noexcept;

/// s -> clamp(round(s + sigma * standard_normal(seed, i)), 0, 255) for every
/// sample i (channels counted separately).
RasterImage add_gaussian_noise(const RasterImage& image, const NoiseConfig& config);

/// Counter-clockwise quarter turn: (cx, cy, w, h) -> (cy, 1 - cx, h, w).
Box2D rotate90(const Box2D& box) noexcept;
RasterImage rotate90(const RasterImage& image);
ImageAnnotation rotate90(const ImageAnnotation& annotation);
Transformed rotate90(const RasterImage& image, const ImageAnnotation& annotation);

}  // namespace larvacount::preprocessing
