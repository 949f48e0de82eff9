// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "larvacount/error.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace larvacount::growth {

struct GrowthObservation {
    double age_days = 0.0;
    double length_mm = 0.0;
};

/// Lengths must lie in (0, 50) mm and ages be finite and non-negative.
void validate(std::span<const GrowthObservation> observations);

enum class GrowthModel { Vbgm, Gompertz, Linear, Power, Exponential };

inline constexpr std::array<GrowthModel, 5> kAllModels = {
    GrowthModel::Vbgm, GrowthModel::Gompertz, GrowthModel::Linear, GrowthModel::Power,
    GrowthModel::Exponential};

std::string_view to_string(GrowthModel model) noexcept;
/// Case-insensitive; accepts "vbgm", "gompertz", "linear", "power", "exponential".
std::optional<GrowthModel> parse_model(std::string_view name) noexcept;

/// L(t) = l_inf (1 - exp(-k1 (t - t0)))
struct VbgmParams {
    double l_inf = 0.0;  // mm
    double k1 = 0.0;     // 1/day
    double t0 = 0.0;     // day
};

/// L(t) = l_inf exp(-k2 exp(-a (t - tr)))
struct GompertzParams {
    double l_inf = 0.0;  // mm
    double k2 = 0.0;
    double a = 0.0;   // 1/day
    double tr = 0.0;  // day, kept within [-5, 5] while fitting
};

/// L(t) = a t + b
struct LinearParams {
    double a = 0.0;  // mm/day
    double b = 0.0;  // mm
};

/// L(t) = a t^b
struct PowerParams {
    double a = 0.0;
    double b = 0.0;
};

/// L(t) = a exp(b t)
struct ExponentialParams {
    double a = 0.0;  // mm
    double b = 0.0;  // 1/day
};

using GrowthParams =
    std::variant<VbgmParams, GompertzParams, LinearParams, PowerParams, ExponentialParams>;

GrowthModel model_of(const GrowthParams& params) noexcept;
std::size_t parameter_count(GrowthModel model) noexcept;
std::vector<std::string_view> parameter_names(GrowthModel model);
std::vector<double> to_vector(const GrowthParams& params);
GrowthParams from_vector(GrowthModel model, std::span<const double> values);

inline constexpr double kGompertzOffsetBound = 5.0;

/// Evaluates the closed form. Throws Error{NonFiniteResult} on overflow or
/// an undefined power.
double predict(const GrowthParams& params, double t);

/// Forward-difference Jacobian of the predictions with respect to the
/// parameters, step 1e-6 * max(1, |theta_j|). Row-major, ages.size() rows.
std::vector<double> forward_jacobian(GrowthModel model, std::span<const double> theta,
                                     std::span<const double> ages);

struct FitOptions {
    int max_iterations = 200;
    double relative_tolerance = 1e-10;
    double initial_damping = 1e-3;
    /// Also try five jittered starting points and keep the lowest SSE.
    bool multi_start = false;
};

struct FitResult {
    GrowthModel kind = GrowthModel::Linear;
    GrowthParams params;
    double sse = 0.0;        // mm^2
    double r_squared = 0.0;
    int iterations = 0;      // accepted steps
    bool converged = false;
    /// SSE after initialization and after every accepted step.
    std::vector<double> sse_trace;
};

/// Least-squares fit. Linear is solved in closed form; the other families
/// are refined by damped Gauss-Newton from a deterministic start.
/// Throws InsufficientData (fewer than parameters + 1 observations),
/// SingularNormalEquations (fewer than two distinct ages) or ZeroVariance.
/// Running out of iterations is reported through `converged`, not thrown.
FitResult fit(GrowthModel model, std::span<const GrowthObservation> observations,
              const FitOptions& options = {});

/// 1 - SSE/SST. Throws Error{ZeroVariance} when every length is equal.
double r_squared(std::span<const GrowthObservation> observations,
                 std::span<const double> predictions);
double sum_squared_error(std::span<const GrowthObservation> observations,
                         std::span<const double> predictions);

struct RankedFit {
    GrowthModel kind = GrowthModel::Linear;
    std::optional<FitResult> result;
    std::optional<ErrorCode> error;
    std::string error_message;
};

/// Fits each requested family and orders them by descending R^2, ties by
/// fewer parameters; failed families go last with their error attached.
/// Throws Error{ZeroVariance} when the lengths are constant.
std::vector<RankedFit> rank_models(std::span<const GrowthObservation> observations,
                                   const FitOptions& options = {},
                                   std::span<const GrowthModel> models = kAllModels);

struct GrowthStage {
    int stage = 0;
    double age_days = 0.0;
    double mean_mm = 0.0;
    double sd_mm = 0.0;
    double min_mm = 0.0;
    double max_mm = 0.0;
};

enum class StageReference {
    /// Per-stage min/max lengths measured under the microscope.
    Measured,
    /// Classic rearing table (mean and standard deviation only); intervals
    /// are taken as mean +/- 2 sd.
    Uno1969,
};

std::span<const GrowthStage> stage_table(StageReference reference = StageReference::Measured) noexcept;

/// The eleven (age, mean length) pairs of the measured stage table.
std::vector<GrowthObservation> reference_observations();

struct StageLookup {
    std::vector<int> stages;     // every stage whose interval holds the length
    std::optional<int> nearest;  // set only when `stages` is empty
};

StageLookup stage_for_length(double length_mm,
                             StageReference reference = StageReference::Measured);

/// Reads `age_days,length_mm[,stage]` CSV text.
std::vector<GrowthObservation> parse_observations_csv(std::string_view csv_text);

inline constexpr std::string_view kFitCsvHeader =
    "model,param_names,param_values,sse,r_squared,converged";
std::string fits_csv(std::span<const RankedFit> fits);

}  // namespace larvacount::growth
