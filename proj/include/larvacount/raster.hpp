// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace larvacount {

/// 8-bit raster with 1 (gray) or 3 (RGB) interleaved channels, row-major.
class RasterImage {
public:
    RasterImage() = default;
    /// Zero-filled image. Throws Error{InvalidArgument} on bad dimensions.
    RasterImage(int width, int height, int channels);
    RasterImage(int width, int height, int channels, std::vector<std::uint8_t> pixels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }

    std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
    std::span<std::uint8_t> pixels() noexcept { return pixels_; }

    std::span<std::uint8_t> row(int y) noexcept {
        return std::span(pixels_).subspan(row_offset(y), row_stride());
    }
    std::span<const std::uint8_t> row(int y) const noexcept {
        return std::span(pixels_).subspan(row_offset(y), row_stride());
    }

    std::uint8_t at(int x, int y, int c = 0) const noexcept { return pixels_[index(x, y, c)]; }
    std::uint8_t& at(int x, int y, int c = 0) noexcept { return pixels_[index(x, y, c)]; }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;

private:
    std::size_t row_stride() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(channels_);
    }
    std::size_t row_offset(int y) const noexcept { return static_cast<std::size_t>(y) * row_stride(); }
    std::size_t index(int x, int y, int c) const noexcept {
        return row_offset(y) + static_cast<std::size_t>(x) * static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<std::uint8_t> pixels_;
};

/// Decodes binary PGM (P5) or PPM (P6) with maxval 255. Header comments are
/// accepted; bytes after the payload are ignored.
RasterImage decode_raster(std::span<const std::uint8_t> bytes);
RasterImage decode_raster(std::string_view bytes);

/// Emits `P5|P6\n<w> <h>\n255\n` followed by the raw samples.
std::string encode_raster(const RasterImage& image);

}  // namespace larvacount
