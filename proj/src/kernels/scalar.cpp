// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/kernels.hpp"

#include <algorithm>

namespace larvacount::kernels::scalar {

double iou(const AbsBox& a, const AbsBox& b) noexcept {
    const double iw = std::max(0.0, std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min));
    const double ih = std::max(0.0, std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min));
    const double inter = iw * ih;
    const double area_a = (a.x_max - a.x_min) * (a.y_max - a.y_min);
    const double area_b = (b.x_max - b.x_min) * (b.y_max - b.y_min);
    return inter / (area_a + area_b - inter);
}

void iou_matrix(std::span<const AbsBox> a, std::span<const AbsBox> b, std::span<double> out) {
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i * b.size() + j] = iou(a[i], b[j]);
        }
    }
}

void mask_row(std::span<std::uint8_t> row, int channels, double cx, double dy2, double r2) {
    const std::size_t width = row.size() / static_cast<std::size_t>(channels);
    for (std::size_t x = 0; x < width; ++x) {
        const double dx = static_cast<double>(x) - cx;
        if (dx * dx + dy2 > r2) {
            std::fill_n(row.begin() + static_cast<std::ptrdiff_t>(x * channels), channels, 0);
        }
    }
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace larvacount::kernels::scalar
