// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace larvacount {

/// Tolerance for boxes that touch the image border after hand labelling.
inline constexpr double kBoxEdgeTolerance = 1e-6;

/// Axis-aligned box in normalized center format (cx, cy, w, h), all in [0, 1].
struct Box2D {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const noexcept { return w * h; }
    friend bool operator==(const Box2D&, const Box2D&) = default;
};

/// Axis-aligned box in absolute pixel coordinates, real valued.
struct AbsBox {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const noexcept { return x_max - x_min; }
    double height() const noexcept { return y_max - y_min; }
    double area() const noexcept { return width() * height(); }
    friend bool operator==(const AbsBox&, const AbsBox&) = default;
};

struct LabeledBox {
    std::uint32_t class_id = 0;
    Box2D box;

    friend bool operator==(const LabeledBox&, const LabeledBox&) = default;
};

struct ScoredBox {
    LabeledBox labeled;
    double confidence = 0.0;

    friend bool operator==(const ScoredBox&, const ScoredBox&) = default;
};

struct ImageAnnotation {
    std::string image_id;
    int width_px = 1;
    int height_px = 1;
    std::vector<LabeledBox> ground_truth;
    std::vector<ScoredBox> predictions;
};

/// Densities (larvae per dish) used by the density experiment.
inline constexpr int kDensityGroups[] = {50, 100, 150, 200, 300, 400, 500};

bool is_valid_density(int density) noexcept;

struct ManifestEntry {
    std::string image_id;
    std::string image_path;
    std::string gt_path;
    std::string pred_path;
    int width_px = 1;
    int height_px = 1;
    std::optional<int> density_group;
    std::optional<std::string> day_label;
};

struct DatasetManifest {
    std::vector<ManifestEntry> entries;
};

inline constexpr std::string_view kManifestHeader =
    "image_id,image_path,gt_path,pred_path,width_px,height_px,density_group,day_label";

/// Checks the Box2D invariants. Fields within kBoxEdgeTolerance outside
/// [0, 1] are clamped; anything further out throws Error{OutOfRange}.
Box2D validated_box(Box2D box, std::size_t line_no = 0);
bool is_valid_box(const Box2D& box) noexcept;

/// Parses `class cx cy w h` lines. Blank lines are skipped; every other line
/// yields exactly one box or an error naming its 1-based line number.
std::vector<LabeledBox> parse_ground_truth(std::string_view text);

/// Parses `class cx cy w h confidence` lines; confidence is mandatory.
std::vector<ScoredBox> parse_predictions(std::string_view text);

/// Six decimals, single spaces, LF terminated lines.
std::string serialize_labels(const std::vector<LabeledBox>& boxes);
std::string serialize_labels(const std::vector<ScoredBox>& boxes);

DatasetManifest load_manifest(std::string_view csv_text);
std::string serialize_manifest(const DatasetManifest& manifest);

AbsBox to_absolute(const Box2D& box, double width_px, double height_px) noexcept;
Box2D to_normalized(const AbsBox& box, double width_px, double height_px) noexcept;

/// Reads the label files of one manifest entry. An empty gt_path or
/// pred_path reads as an empty box list. Errors are rethrown with the image_id prepended.
ImageAnnotation load_image_annotation(const ManifestEntry& entry);

}  // namespace larvacount
