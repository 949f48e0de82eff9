// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/kernels.hpp"

#include <atomic>

namespace larvacount::kernels {
namespace {

Isa detect() noexcept {
#if defined(LARVACOUNT_HAVE_AVX2)
    if (__builtin_cpu_supports("avx2")) {
        return Isa::Avx2;
    }
#endif
    return Isa::Scalar;
}

std::atomic<Isa>& selected() noexcept {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
    return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool isa_supported(Isa isa) noexcept {
    return isa == Isa::Scalar || detect() == isa;
}

Isa active_isa() noexcept {
    return selected().load(std::memory_order_relaxed);
}

Isa force_isa(Isa isa) noexcept {
    const Isa chosen = isa_supported(isa) ? isa : Isa::Scalar;
    selected().store(chosen, std::memory_order_relaxed);
    return chosen;
}

void reset_isa() noexcept {
    selected().store(detect(), std::memory_order_relaxed);
}

void iou_matrix(std::span<const AbsBox> a, std::span<const AbsBox> b, std::span<double> out) {
#if defined(LARVACOUNT_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) {
        return avx2::iou_matrix(a, b, out);
    }
#endif
    scalar::iou_matrix(a, b, out);
}

void mask_row(std::span<std::uint8_t> row, int channels, double cx, double dy2, double r2) {
#if defined(LARVACOUNT_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) {
        return avx2::mask_row(row, channels, cx, dy2, r2);
    }
#endif
    scalar::mask_row(row, channels, cx, dy2, r2);
}

double sum_squared_diff(std::span<const double> a, std::span<const double> b) {
#if defined(LARVACOUNT_HAVE_AVX2)
    if (active_isa() == Isa::Avx2) {
        return avx2::sum_squared_diff(a, b);
    }
#endif
    return scalar::sum_squared_diff(a, b);
}

}  // namespace larvacount::kernels
