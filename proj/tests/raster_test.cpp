// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/error.hpp"
#include "larvacount/raster.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

namespace larvacount {
namespace {

ErrorCode decode_error(std::string_view bytes) {
    try {
        decode_raster(bytes);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "decode accepted invalid input";
    return ErrorCode::Io;
}

TEST(Raster, DecodesTwoPixelPpm) {
    const std::string payload("\xff\x00\x00\x00\x00\xff", 6);
    const auto img = decode_raster(std::string("P6\n2 1\n255\n") + payload);
    EXPECT_EQ(img.width(), 2);
    EXPECT_EQ(img.height(), 1);
    EXPECT_EQ(img.channels(), 3);
    EXPECT_EQ(img.at(0, 0, 0), 255);
    EXPECT_EQ(img.at(0, 0, 2), 0);
    EXPECT_EQ(img.at(1, 0, 2), 255);
}

TEST(Raster, HeaderWithCommentsAndOddWhitespace) {
    const std::string bytes = std::string("P5 # gray\n# another\n3\t2\n255 ") + "abcdef";
    const auto img = decode_raster(bytes);
    EXPECT_EQ(img.width(), 3);
    EXPECT_EQ(img.height(), 2);
    EXPECT_EQ(img.at(2, 1), 'f');
    EXPECT_EQ(encode_raster(img), std::string("P5\n3 2\n255\n") + "abcdef");
}

TEST(Raster, EncodeDecodeRoundTripIsByteExact) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> dim(1, 40);
    for (int trial = 0; trial < 50; ++trial) {
        const int channels = trial % 2 ? 3 : 1;
        const auto img = testing::random_raster(rng, dim(rng), dim(rng), channels);
        const std::string bytes = encode_raster(img);
        EXPECT_EQ(decode_raster(bytes), img);
        EXPECT_EQ(encode_raster(decode_raster(bytes)), bytes);
    }
}

TEST(Raster, ErrorPaths) {
    EXPECT_EQ(decode_error("P3\n1 1\n255\n0 0 0"), ErrorCode::UnsupportedFormat);
    EXPECT_EQ(decode_error("GIF89a"), ErrorCode::UnsupportedFormat);
    EXPECT_EQ(decode_error(std::string("P6\n10 10\n255\n") + std::string(15, 'x')),
              ErrorCode::TruncatedPayload);
    EXPECT_EQ(decode_error("P5\n1 1\n65535\n\x00\x00"), ErrorCode::MaxvalNot255);
    EXPECT_EQ(decode_error("P5\n4"), ErrorCode::TruncatedPayload);
    EXPECT_EQ(decode_error("P5\n0 4\n255\n"), ErrorCode::UnsupportedFormat);
}

TEST(Raster, ConstructorEnforcesBufferLength) {
    EXPECT_THROW(RasterImage(2, 2, 3, std::vector<std::uint8_t>(11)), Error);
    EXPECT_THROW(RasterImage(2, 2, 2), Error);
    EXPECT_THROW(RasterImage(0, 2, 1), Error);
    EXPECT_EQ(RasterImage(2, 2, 3).pixels().size(), 12u);
}

}  // namespace
}  // namespace larvacount
