// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/raster.hpp"

#include "larvacount/error.hpp"

#include <cctype>
#include <limits>

namespace larvacount {

RasterImage::RasterImage(int width, int height, int channels)
    : RasterImage(width, height, channels,
                  std::vector<std::uint8_t>(width > 0 && height > 0 && channels > 0
                                                ? static_cast<std::size_t>(width) *
                                                      static_cast<std::size_t>(height) *
                                                      static_cast<std::size_t>(channels)
                                                : 0)) {}

RasterImage::RasterImage(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::InvalidArgument, "raster dimensions must be positive");
    }
    if (channels != 1 && channels != 3) {
        throw Error(ErrorCode::InvalidArgument, "raster must have 1 or 3 channels");
    }
    if (pixels_.size() != row_stride() * static_cast<std::size_t>(height)) {
        throw Error(ErrorCode::InvalidArgument, "pixel buffer length does not match dimensions");
    }
}

namespace {

class HeaderReader {
public:
    explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    // Reads one unsigned decimal token after skipping whitespace and comments.
    long long next_number(const char* what) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size()) {
            throw Error(ErrorCode::TruncatedPayload, std::string("header ends before ") + what);
        }
        if (!std::isdigit(bytes_[pos_])) {
            throw Error(ErrorCode::UnsupportedFormat, std::string("malformed ") + what + " in header");
        }
        long long value = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            value = value * 10 + (bytes_[pos_] - '0');
            if (value > std::numeric_limits<int>::max()) {
                throw Error(ErrorCode::UnsupportedFormat, std::string(what) + " too large");
            }
            ++pos_;
        }
        return value;
    }

    // Exactly one whitespace byte separates maxval from the payload.
    std::size_t payload_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
            throw Error(ErrorCode::TruncatedPayload, "missing separator before raster payload");
        }
        return pos_ + 1;
    }

private:
    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') {
                    ++pos_;
                }
            } else {
                break;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 2;
};

}  // namespace

RasterImage decode_raster(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
        throw Error(ErrorCode::UnsupportedFormat, "expected binary PGM (P5) or PPM (P6) magic");
    }
    const int channels = bytes[1] == '6' ? 3 : 1;
    HeaderReader header(bytes);
    const auto width = header.next_number("width");
    const auto height = header.next_number("height");
    const auto maxval = header.next_number("maxval");
    if (width < 1 || height < 1) {
        throw Error(ErrorCode::UnsupportedFormat, "raster dimensions must be positive");
    }
    if (maxval != 255) {
        throw Error(ErrorCode::MaxvalNot255, "maxval is " + std::to_string(maxval) + ", expected 255");
    }
    const std::size_t start = header.payload_start();
    const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                             static_cast<std::size_t>(channels);
    if (bytes.size() < start || bytes.size() - start < need) {
        throw Error(ErrorCode::TruncatedPayload,
                    "payload holds " + std::to_string(bytes.size() > start ? bytes.size() - start : 0) +
                        " bytes, header requires " + std::to_string(need));
    }
    std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                     bytes.begin() + static_cast<std::ptrdiff_t>(start + need));
    return RasterImage(static_cast<int>(width), static_cast<int>(height), channels, std::move(pixels));
}

RasterImage decode_raster(std::string_view bytes) {
    return decode_raster(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::string encode_raster(const RasterImage& image) {
    std::string out = image.channels() == 3 ? "P6\n" : "P5\n";
    out += std::to_string(image.width()) + ' ' + std::to_string(image.height()) + "\n255\n";
    const auto px = image.pixels();
    out.append(reinterpret_cast<const char*>(px.data()), px.size());
    return out;
}

}  // namespace larvacount
