// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/annotations.hpp"

#include "larvacount/error.hpp"
#include "larvacount/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <system_error>

namespace larvacount {
namespace {

std::vector<std::string_view> split_whitespace(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t pos = 0;
    while (pos < line.size()) {
        while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) {
            ++pos;
        }
        std::size_t end = pos;
        while (end < line.size() && line[end] != ' ' && line[end] != '\t') {
            ++end;
        }
        if (end > pos) {
            fields.push_back(line.substr(pos, end - pos));
        }
        pos = end;
    }
    return fields;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') {
        ++first;
    }
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

// Calls fn(line_no, fields) for every non-blank line.
template <typename Fn>
void for_each_record(std::string_view text, Fn&& fn) {
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        ++line_no;
        auto fields = split_whitespace(line);
        if (!fields.empty()) {
            fn(line_no, fields);
        }
        if (end == text.size()) {
            break;
        }
        pos = end + 1;
    }
}

LabeledBox parse_labeled(std::size_t line_no, const std::vector<std::string_view>& fields) {
    std::uint32_t class_id = 0;
    if (!parse_number(fields[0], class_id)) {
        throw Error(ErrorCode::MalformedLine,
                    "line " + std::to_string(line_no) + ": class id '" + std::string(fields[0]) +
                        "' is not a non-negative integer",
                    line_no);
    }
    double values[4];
    for (int i = 0; i < 4; ++i) {
        if (!parse_number(fields[i + 1], values[i]) || !std::isfinite(values[i])) {
            throw Error(ErrorCode::MalformedLine,
                        "line " + std::to_string(line_no) + ": field '" + std::string(fields[i + 1]) +
                            "' is not a number",
                        line_no);
        }
    }
    return {class_id, validated_box({values[0], values[1], values[2], values[3]}, line_no)};
}

void expect_fields(std::size_t line_no, std::size_t got, std::size_t want) {
    if (got != want) {
        throw Error(ErrorCode::MalformedLine,
                    "line " + std::to_string(line_no) + ": expected " + std::to_string(want) +
                        " fields, found " + std::to_string(got),
                    line_no);
    }
}

void append_box(std::string& out, const LabeledBox& b) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%u %.6f %.6f %.6f %.6f", b.class_id, b.box.cx, b.box.cy, b.box.w,
                  b.box.h);
    out += buf;
}

int parse_positive_int(const std::string& text, const char* column, std::size_t row) {
    int value = 0;
    if (!parse_number(std::string_view(text), value) || value < 1) {
        throw Error(ErrorCode::MalformedRow,
                    "row " + std::to_string(row) + ": " + column + " '" + text +
                        "' is not a positive integer",
                    row);
    }
    return value;
}

}  // namespace

bool is_valid_density(int density) noexcept {
    return std::find(std::begin(kDensityGroups), std::end(kDensityGroups), density) !=
           std::end(kDensityGroups);
}

bool is_valid_box(const Box2D& b) noexcept {
    constexpr double tol = kBoxEdgeTolerance;
    auto in_unit = [](double v) { return v >= -tol && v <= 1.0 + tol; };
    if (!std::isfinite(b.cx) || !std::isfinite(b.cy) || !std::isfinite(b.w) || !std::isfinite(b.h)) {
        return false;
    }
    if (!(b.w > 0.0) || !(b.h > 0.0) || !in_unit(b.cx) || !in_unit(b.cy) || !in_unit(b.w) ||
        !in_unit(b.h)) {
        return false;
    }
    return b.cx - b.w / 2 >= -tol && b.cx + b.w / 2 <= 1.0 + tol && b.cy - b.h / 2 >= -tol &&
           b.cy + b.h / 2 <= 1.0 + tol;
}

Box2D validated_box(Box2D box, std::size_t line_no) {
    if (!is_valid_box(box)) {
        throw Error(ErrorCode::OutOfRange,
                    "line " + std::to_string(line_no) + ": box lies outside the unit square",
                    line_no);
    }
    auto clamp01 = [](double v) { return std::clamp(v, 0.0, 1.0); };
    box.cx = clamp01(box.cx);
    box.cy = clamp01(box.cy);
    box.w = clamp01(box.w);
    box.h = clamp01(box.h);
    return box;
}

std::vector<LabeledBox> parse_ground_truth(std::string_view text) {
    std::vector<LabeledBox> boxes;
    for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& fields) {
        expect_fields(line_no, fields.size(), 5);
        boxes.push_back(parse_labeled(line_no, fields));
    });
    return boxes;
}

std::vector<ScoredBox> parse_predictions(std::string_view text) {
    std::vector<ScoredBox> boxes;
    for_each_record(text, [&](std::size_t line_no, const std::vector<std::string_view>& fields) {
        expect_fields(line_no, fields.size(), 6);
        ScoredBox scored{parse_labeled(line_no, fields), 0.0};
        if (!parse_number(fields[5], scored.confidence) || !std::isfinite(scored.confidence)) {
            throw Error(ErrorCode::MalformedLine,
                        "line " + std::to_string(line_no) + ": confidence '" +
                            std::string(fields[5]) + "' is not a number",
                        line_no);
        }
        if (scored.confidence < 0.0 || scored.confidence > 1.0) {
            throw Error(ErrorCode::OutOfRange,
                        "line " + std::to_string(line_no) + ": confidence outside [0, 1]", line_no);
        }
        boxes.push_back(scored);
    });
    return boxes;
}

std::string serialize_labels(const std::vector<LabeledBox>& boxes) {
    std::string out;
    for (const auto& b : boxes) {
        append_box(out, b);
        out += '\n';
    }
    return out;
}

std::string serialize_labels(const std::vector<ScoredBox>& boxes) {
    std::string out;
    for (const auto& b : boxes) {
        append_box(out, b.labeled);
        char buf[32];
        std::snprintf(buf, sizeof buf, " %.6f\n", b.confidence);
        out += buf;
    }
    return out;
}

DatasetManifest load_manifest(std::string_view csv_text) {
    const auto rows = io::parse_csv(csv_text);
    if (rows.empty()) {
        throw Error(ErrorCode::MissingColumn, "manifest has no header row");
    }
    static constexpr const char* kColumns[] = {"image_id", "image_path", "gt_path",
                                               "pred_path", "width_px", "height_px",
                                               "density_group", "day_label"};
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < rows[0].size(); ++i) {
        index.emplace(rows[0][i], i);
    }
    std::size_t col[8];
    for (int c = 0; c < 8; ++c) {
        auto it = index.find(kColumns[c]);
        if (it == index.end()) {
            throw Error(ErrorCode::MissingColumn,
                        std::string("manifest header lacks column '") + kColumns[c] + "'");
        }
        col[c] = it->second;
    }

    DatasetManifest manifest;
    std::set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t row_no = r + 1;
        if (row.size() != rows[0].size()) {
            throw Error(ErrorCode::MalformedRow,
                        "row " + std::to_string(row_no) + ": expected " +
                            std::to_string(rows[0].size()) + " fields, found " +
                            std::to_string(row.size()),
                        row_no);
        }
        ManifestEntry e;
        e.image_id = row[col[0]];
        e.image_path = row[col[1]];
        e.gt_path = row[col[2]];
        e.pred_path = row[col[3]];
        if (e.image_id.empty()) {
            throw Error(ErrorCode::MalformedRow, "row " + std::to_string(row_no) + ": empty image_id",
                        row_no);
        }
        e.width_px = parse_positive_int(row[col[4]], "width_px", row_no);
        e.height_px = parse_positive_int(row[col[5]], "height_px", row_no);
        if (const auto& d = row[col[6]]; !d.empty()) {
            int density = 0;
            if (!parse_number(std::string_view(d), density) || !is_valid_density(density)) {
                throw Error(ErrorCode::BadDensity,
                            "row " + std::to_string(row_no) + ": density_group '" + d +
                                "' is not one of 50,100,150,200,300,400,500",
                            row_no);
            }
            e.density_group = density;
        }
        if (const auto& day = row[col[7]]; !day.empty()) {
            e.day_label = day;
        }
        if (!seen.insert(e.image_id).second) {
            throw Error(ErrorCode::DuplicateImageId,
                        "row " + std::to_string(row_no) + ": image_id '" + e.image_id +
                            "' appears more than once",
                        row_no);
        }
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

std::string serialize_manifest(const DatasetManifest& manifest) {
    std::string out(kManifestHeader);
    out += '\n';
    for (const auto& e : manifest.entries) {
        out += io::csv_field(e.image_id) + ',' + io::csv_field(e.image_path) + ',' +
               io::csv_field(e.gt_path) + ',' + io::csv_field(e.pred_path) + ',' +
               std::to_string(e.width_px) + ',' + std::to_string(e.height_px) + ',';
        if (e.density_group) {
            out += std::to_string(*e.density_group);
        }
        out += ',';
        if (e.day_label) {
            out += io::csv_field(*e.day_label);
        }
        out += '\n';
    }
    return out;
}

AbsBox to_absolute(const Box2D& b, double width_px, double height_px) noexcept {
    return {(b.cx - b.w / 2) * width_px, (b.cy - b.h / 2) * height_px, (b.cx + b.w / 2) * width_px,
            (b.cy + b.h / 2) * height_px};
}

Box2D to_normalized(const AbsBox& b, double width_px, double height_px) noexcept {
    return {(b.x_min + b.x_max) / 2 / width_px, (b.y_min + b.y_max) / 2 / height_px,
            (b.x_max - b.x_min) / width_px, (b.y_max - b.y_min) / height_px};
}

ImageAnnotation load_image_annotation(const ManifestEntry& entry) {
    ImageAnnotation ann;
    ann.image_id = entry.image_id;
    ann.width_px = entry.width_px;
    ann.height_px = entry.height_px;
    try {
        if (!entry.gt_path.empty()) {
            ann.ground_truth = parse_ground_truth(io::read_file(entry.gt_path));
        }
        if (!entry.pred_path.empty()) {
            ann.predictions = parse_predictions(io::read_file(entry.pred_path));
        }
    } catch (const Error& e) {
        throw Error(e.code(), "image '" + entry.image_id + "': " + e.what(), e.line());
    }
    return ann;
}

}  // namespace larvacount
