// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/preprocessing.hpp"

#include "larvacount/error.hpp"
#include "larvacount/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace larvacount::preprocessing {
namespace {

std::optional<Box2D> crop_box(const Box2D& box, double width, double height, double off_x,
                              double off_y, double target_w, double target_h) {
    const AbsBox abs = to_absolute(box, width, height);
    const AbsBox clipped{std::clamp(abs.x_min - off_x, 0.0, target_w),
                         std::clamp(abs.y_min - off_y, 0.0, target_h),
                         std::clamp(abs.x_max - off_x, 0.0, target_w),
                         std::clamp(abs.y_max - off_y, 0.0, target_h)};
    if (clipped.width() <= 0.0 || clipped.height() <= 0.0 ||
        clipped.area() < kMinClippedAreaFraction * target_w * target_h) {
        return std::nullopt;
    }
    return validated_box(to_normalized(clipped, target_w, target_h));
}

void check_dimensions(const RasterImage& image, const ImageAnnotation& annotation) {
    if (image.width() != annotation.width_px || image.height() != annotation.height_px) {
        throw Error(ErrorCode::InvalidArgument,
                    "annotation '" + annotation.image_id + "' is " +
                        std::to_string(annotation.width_px) + "x" +
                        std::to_string(annotation.height_px) + " but raster is " +
                        std::to_string(image.width()) + "x" + std::to_string(image.height()));
    }
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix64_at(std::uint64_t seed, std::uint64_t counter) noexcept {
    std::uint64_t z = seed + (counter + 1) * kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Uniform on the open interval (0, 1).
double open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace

ImageAnnotation center_crop(const ImageAnnotation& annotation, int target_w, int target_h) {
    if (target_w < 1 || target_h < 1 || target_w > annotation.width_px ||
        target_h > annotation.height_px) {
        throw Error(ErrorCode::TargetTooLarge,
                    "crop " + std::to_string(target_w) + "x" + std::to_string(target_h) +
                        " does not fit in " + std::to_string(annotation.width_px) + "x" +
                        std::to_string(annotation.height_px));
    }
    const int off_x = (annotation.width_px - target_w) / 2;
    const int off_y = (annotation.height_px - target_h) / 2;
    const double w = annotation.width_px;
    const double h = annotation.height_px;

    ImageAnnotation out;
    out.image_id = annotation.image_id;
    out.width_px = target_w;
    out.height_px = target_h;
    for (const auto& gt : annotation.ground_truth) {
        if (auto b = crop_box(gt.box, w, h, off_x, off_y, target_w, target_h)) {
            out.ground_truth.push_back({gt.class_id, *b});
        }
    }
    for (const auto& pred : annotation.predictions) {
        if (auto b = crop_box(pred.labeled.box, w, h, off_x, off_y, target_w, target_h)) {
            out.predictions.push_back({{pred.labeled.class_id, *b}, pred.confidence});
        }
    }
    return out;
}

Transformed center_crop(const RasterImage& image, const ImageAnnotation& annotation, int target_w,
                        int target_h) {
    check_dimensions(image, annotation);
    ImageAnnotation cropped_ann = center_crop(annotation, target_w, target_h);
    const int off_x = (image.width() - target_w) / 2;
    const int off_y = (image.height() - target_h) / 2;

    RasterImage cropped(target_w, target_h, image.channels());
    const std::size_t span_len = static_cast<std::size_t>(target_w) * image.channels();
    for (int y = 0; y < target_h; ++y) {
        const auto src = image.row(y + off_y).subspan(static_cast<std::size_t>(off_x) * image.channels(),
                                                      span_len);
        std::copy(src.begin(), src.end(), cropped.row(y).begin());
    }
    return {std::move(cropped), std::move(cropped_ann)};
}

RasterImage circular_mask(const RasterImage& image, double center_x_px, double center_y_px,
                          double radius_px) {
    if (!(radius_px > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "mask radius must be positive");
    }
    RasterImage out = image;
    const double r2 = radius_px * radius_px;
    for (int y = 0; y < out.height(); ++y) {
        const double dy = static_cast<double>(y) - center_y_px;
        kernels::mask_row(out.row(y), out.channels(), center_x_px, dy * dy, r2);
    }
    return out;
}

double area_quantile(std::span<const LabeledBox> boxes, double q) {
    if (boxes.empty()) {
        throw Error(ErrorCode::EmptyDataset, "area quantile of an empty box list");
    }
    if (!(q > 0.0 && q < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "quantile must lie in (0, 1)");
    }
    std::vector<double> areas;
    areas.reserve(boxes.size());
    for (const auto& b : boxes) {
        areas.push_back(b.box.area());
    }
    std::sort(areas.begin(), areas.end());
    const double rank = q * static_cast<double>(areas.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, areas.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return areas[lo] + frac * (areas[hi] - areas[lo]);
}

std::vector<LabeledBox> enlarge_small_boxes(std::span<const LabeledBox> boxes,
                                            const EnlargeConfig& config) {
    if (!(config.threshold_area > 0.0 && config.threshold_area < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "threshold area must lie in (0, 1)");
    }
    std::vector<LabeledBox> out(boxes.begin(), boxes.end());
    for (auto& lb : out) {
        Box2D& b = lb.box;
        const double area = b.area();
        if (area >= config.threshold_area) {
            continue;
        }
        const double factor = config.threshold_area / area;
        const double scale = config.mode == EnlargeMode::Literal ? factor : std::sqrt(factor);
        const double half_w = std::max(std::min({b.w * scale / 2, b.cx, 1.0 - b.cx}), b.w / 2);
        const double half_h = std::max(std::min({b.h * scale / 2, b.cy, 1.0 - b.cy}), b.h / 2);
        b.w = 2 * half_w;
        b.h = 2 * half_h;
    }
    return out;
}

ImageAnnotation enlarge_small_boxes(const ImageAnnotation& annotation, const EnlargeConfig& config) {
    ImageAnnotation out = annotation;
    out.ground_truth = enlarge_small_boxes(annotation.ground_truth, config);
    return out;
}

double standard_normal(std::uint64_t seed, std::uint64_t index) noexcept {
    const double u1 = open_unit(splitmix64_at(seed, 2 * index));
    const double u2 = open_unit(splitmix64_at(seed, 2 * index + 1));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RasterImage add_gaussian_noise(const RasterImage& image, const NoiseConfig& config) {
    if (!(config.variance >= 0.0) || !std::isfinite(config.variance)) {
        throw Error(ErrorCode::InvalidArgument, "noise variance must be finite and non-negative");
    }
    RasterImage out = image;
    if (config.variance == 0.0) {
        return out;
    }
    const double sigma = std::sqrt(config.variance);
    auto px = out.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) {
        const double noisy = std::round(px[i] + sigma * standard_normal(config.seed, i));
        px[i] = static_cast<std::uint8_t>(std::clamp(noisy, 0.0, 255.0));
    }
    return out;
}

Box2D rotate90(const Box2D& box) noexcept {
    return {box.cy, 1.0 - box.cx, box.h, box.w};
}

RasterImage rotate90(const RasterImage& image) {
    const int w = image.width();
    const int h = image.height();
    const int ch = image.channels();
    RasterImage out(h, w, ch);
    // source (x, y) lands at (y, w - 1 - x)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                out.at(y, w - 1 - x, c) = image.at(x, y, c);
            }
        }
    }
    return out;
}

ImageAnnotation rotate90(const ImageAnnotation& annotation) {
    ImageAnnotation out = annotation;
    std::swap(out.width_px, out.height_px);
    for (auto& gt : out.ground_truth) {
        gt.box = validated_box(rotate90(gt.box));
    }
    for (auto& pred : out.predictions) {
        pred.labeled.box = validated_box(rotate90(pred.labeled.box));
    }
    return out;
}

Transformed rotate90(const RasterImage& image, const ImageAnnotation& annotation) {
    check_dimensions(image, annotation);
    return {rotate90(image), rotate90(annotation)};
}

}  // namespace larvacount::preprocessing
