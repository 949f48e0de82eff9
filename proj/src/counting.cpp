// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/counting.hpp"

#include "larvacount/error.hpp"
#include "larvacount/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace larvacount::counting {

CountRecord count_image(const ImageAnnotation& annotation, double confidence_threshold,
                        bool has_ground_truth) {
    CountRecord record;
    record.image_id = annotation.image_id;
    record.predicted_count = static_cast<std::size_t>(
        std::count_if(annotation.predictions.begin(), annotation.predictions.end(),
                      [&](const ScoredBox& p) { return p.confidence >= confidence_threshold; }));
    if (has_ground_truth) {
        record.true_count = annotation.ground_truth.size();
    }
    return record;
}

PondEstimate extrapolate_pond(std::size_t sampled_count, double volume_factor) {
    if (!(volume_factor > 0.0) || !std::isfinite(volume_factor)) {
        throw Error(ErrorCode::InvalidArgument, "volume factor must be positive");
    }
    return {sampled_count, volume_factor, static_cast<double>(sampled_count) * volume_factor};
}

bool strictly_decreasing(std::span<const double> values) noexcept {
    return std::adjacent_find(values.begin(), values.end(),
                              [](double a, double b) { return !(b < a); }) == values.end();
}

DensityReport density_summary(std::span<const evaluation::ImageReport> images) {
    struct Sums {
        std::size_t n = 0;
        double accuracy = 0.0;
        double ap = 0.0;
    };
    std::map<int, Sums> groups;
    for (const auto& img : images) {
        if (!img.density_group) {
            throw Error(ErrorCode::MissingDensity, "image '" + img.image_id + "' has no density group");
        }
        Sums& s = groups[*img.density_group];
        ++s.n;
        s.accuracy += img.metrics.counting_accuracy;
        s.ap += img.ap;
    }
    DensityReport report;
    std::vector<double> accuracies;
    for (const auto& [density, s] : groups) {
        const double n = static_cast<double>(s.n);
        report.rows.push_back({density, s.n, s.accuracy / n, s.ap / n});
        accuracies.push_back(s.accuracy / n);
    }
    report.accuracy_decreases_with_density = accuracies.size() >= 2 && strictly_decreasing(accuracies);
    return report;
}

std::string count_csv(std::span<const CountRecord> records, double volume_factor) {
    std::string out(kCountCsvHeader);
    out += '\n';
    for (const auto& r : records) {
        out += io::csv_field(r.image_id) + ',' + std::to_string(r.predicted_count) + ',';
        if (r.true_count) {
            out += std::to_string(*r.true_count);
        }
        out += ',' + io::format_fixed(extrapolate_pond(r.predicted_count, volume_factor).estimated_total, 1) +
               '\n';
    }
    return out;
}

std::string density_csv(const DensityReport& report) {
    std::string out(kDensityCsvHeader);
    out += '\n';
    for (const auto& row : report.rows) {
        out += std::to_string(row.density) + ',' + std::to_string(row.num_images) + ',' +
               io::format_fixed(row.mean_counting_accuracy, 4) + ',' +
               io::format_fixed(row.mean_ap, 4) + '\n';
    }
    return out;
}

}  // namespace larvacount::counting
