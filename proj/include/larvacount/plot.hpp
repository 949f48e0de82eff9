// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "larvacount/growth.hpp"

#include <span>
#include <string>

namespace larvacount::plot {

/// Self-contained SVG with one <circle class="observation"> per data point
/// and one <path class="fit"> per successful fit, length (mm) against age
/// (days).
std::string growth_svg(std::span<const growth::GrowthObservation> observations,
                       std::span<const growth::RankedFit> fits);

}  // namespace larvacount::plot
