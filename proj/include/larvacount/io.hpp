// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace larvacount::io {

// Both throw Error{Io} on failure.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

/// Minimal RFC 4180 reader: comma separated, double-quoted fields may hold
/// commas, quotes ("") and newlines. CRLF and LF both end a record. Blank
/// records are skipped.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

/// Quotes a field only when it contains a comma, quote or line break.
std::string csv_field(std::string_view value);

std::string format_fixed(double value, int decimals);

}  // namespace larvacount::io
