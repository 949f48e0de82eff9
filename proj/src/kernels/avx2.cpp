// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

// Compiled with -mavx2 (and without -mfma) so products are never contracted.

#include "larvacount/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <vector>

namespace larvacount::kernels::avx2 {

void iou_matrix(std::span<const AbsBox> a, std::span<const AbsBox> b, std::span<double> out) {
    const std::size_t nb = b.size();
    const std::size_t nb4 = nb & ~std::size_t{3};

    // SoA copy of the column boxes
    std::vector<double> bx0(nb4), by0(nb4), bx1(nb4), by1(nb4), barea(nb4);
    for (std::size_t j = 0; j < nb4; ++j) {
        bx0[j] = b[j].x_min;
        by0[j] = b[j].y_min;
        bx1[j] = b[j].x_max;
        by1[j] = b[j].y_max;
        barea[j] = (b[j].x_max - b[j].x_min) * (b[j].y_max - b[j].y_min);
    }

    const __m256d zero = _mm256_setzero_pd();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const AbsBox& ai = a[i];
        const __m256d ax0 = _mm256_set1_pd(ai.x_min);
        const __m256d ay0 = _mm256_set1_pd(ai.y_min);
        const __m256d ax1 = _mm256_set1_pd(ai.x_max);
        const __m256d ay1 = _mm256_set1_pd(ai.y_max);
        const __m256d aarea = _mm256_set1_pd((ai.x_max - ai.x_min) * (ai.y_max - ai.y_min));
        double* row = out.data() + i * nb;

        std::size_t j = 0;
        for (; j < nb4; j += 4) {
            // operand order mirrors std::min/std::max in the scalar kernel
            const __m256d ix1 = _mm256_min_pd(_mm256_loadu_pd(&bx1[j]), ax1);
            const __m256d ix0 = _mm256_max_pd(_mm256_loadu_pd(&bx0[j]), ax0);
            const __m256d iy1 = _mm256_min_pd(_mm256_loadu_pd(&by1[j]), ay1);
            const __m256d iy0 = _mm256_max_pd(_mm256_loadu_pd(&by0[j]), ay0);
            const __m256d iw = _mm256_max_pd(_mm256_sub_pd(ix1, ix0), zero);
            const __m256d ih = _mm256_max_pd(_mm256_sub_pd(iy1, iy0), zero);
            const __m256d inter = _mm256_mul_pd(iw, ih);
            const __m256d uni =
                _mm256_sub_pd(_mm256_add_pd(aarea, _mm256_loadu_pd(&barea[j])), inter);
            _mm256_storeu_pd(row + j, _mm256_div_pd(inter, uni));
        }
        for (; j < nb; ++j) {
            row[j] = scalar::iou(ai, b[j]);
        }
    }
}

void mask_row(std::span<std::uint8_t> row, int channels, double cx, double dy2, double r2) {
    const std::size_t width = row.size() / static_cast<std::size_t>(channels);
    const std::size_t width4 = width & ~std::size_t{3};
    const __m256d vcx = _mm256_set1_pd(cx);
    const __m256d vdy2 = _mm256_set1_pd(dy2);
    const __m256d vr2 = _mm256_set1_pd(r2);
    const __m256d step = _mm256_set1_pd(4.0);
    __m256d xs = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);

    std::size_t x = 0;
    for (; x < width4; x += 4) {
        const __m256d dx = _mm256_sub_pd(xs, vcx);
        const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dx, dx), vdy2);
        const int outside = _mm256_movemask_pd(_mm256_cmp_pd(d2, vr2, _CMP_GT_OQ));
        if (outside == 0xF && channels == 1) {
            std::fill_n(row.begin() + static_cast<std::ptrdiff_t>(x), 4, 0);
        } else if (outside != 0) {
            for (int lane = 0; lane < 4; ++lane) {
                if (outside & (1 << lane)) {
                    std::fill_n(row.begin() + static_cast<std::ptrdiff_t>((x + lane) * channels),
                                channels, 0);
                }
            }
        }
        xs = _mm256_add_pd(xs, step);
    }
    for (; x < width; ++x) {
        const double dx = static_cast<double>(x) - cx;
        if (dx * dx + dy2 > r2) {
            std::fill_n(row.begin() + static_cast<std::ptrdiff_t>(x * channels), channels, 0);
        }
    }
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    const std::size_t n4 = n & ~std::size_t{3};
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i < n4; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(d, d));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double sum = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

}  // namespace larvacount::kernels::avx2
