// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Data-parallel inner loops. Every kernel has a scalar reference in
// kernels::scalar and, on x86-64, an AVX2 variant in kernels::avx2. The
// unqualified entry points dispatch at runtime to the best supported ISA.
//
// iou_matrix and mask_row are bit-identical across ISAs (same operation
// order, no contraction); sum_squared_diff reassociates the sum and agrees
// with the scalar result to rounding.

#include "larvacount/annotations.hpp"

#include <cstdint>
#include <span>
#include <string_view>

namespace larvacount::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;
Isa active_isa() noexcept;

/// Pins dispatch to `isa` (falls back to Scalar when unsupported) and returns
/// the ISA actually selected. Intended for tests and benchmarks.
Isa force_isa(Isa isa) noexcept;
/// Restores automatic selection.
void reset_isa() noexcept;

/// out[i * b.size() + j] = IoU(a[i], b[j]). Boxes must have positive extent.
void iou_matrix(std::span<const AbsBox> a, std::span<const AbsBox> b, std::span<double> out);

/// Zeroes every pixel of one row whose squared distance (x - cx)^2 + dy2
/// exceeds r2. `row` holds width * channels interleaved samples.
void mask_row(std::span<std::uint8_t> row, int channels, double cx, double dy2, double r2);

/// Sum over i of (a[i] - b[i])^2.
double sum_squared_diff(std::span<const double> a, std::span<const double> b);

namespace scalar {
double iou(const AbsBox& a, const AbsBox& b) noexcept;
void iou_matrix(std::span<const AbsBox> a, std::span<const AbsBox> b, std::span<double> out);
void mask_row(std::span<std::uint8_t> row, int channels, double cx, double dy2, double r2);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);
}  // namespace scalar

#if defined(LARVACOUNT_HAVE_AVX2)
namespace avx2 {
void iou_matrix(std::span<const AbsBox> a, std::span<const AbsBox> b, std::span<double> out);
void mask_row(std::span<std::uint8_t> row, int channels, double cx, double dy2, double r2);
double sum_squared_diff(std::span<const double> a, std::span<const double> b);
}  // namespace avx2
#endif

}  // namespace larvacount::kernels
