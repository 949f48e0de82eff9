// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/growth.hpp"

#include "larvacount/io.hpp"
#include "larvacount/kernels.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

namespace larvacount::growth {
namespace {

// Per-stage lengths (mm) measured from microscope images, stages 1..11.
constexpr GrowthStage kMeasuredStages[] = {
    {1, 0, 1.65, 0.10, 1.53, 1.85},    {2, 1, 1.81, 0.09, 1.60, 1.90},
    {3, 3, 1.93, 0.004, 1.93, 1.935},  {4, 4, 2.78, 0.09, 2.64, 2.92},
    {5, 5, 3.37, 0.21, 3.01, 3.76},    {6, 6, 3.46, 0.22, 3.15, 3.88},
    {7, 8, 4.55, 0.07, 4.44, 4.65},    {8, 9, 4.95, 0.18, 4.75, 5.22},
    {9, 12, 5.75, 0.38, 5.23, 6.39},   {10, 14, 6.95, 0.25, 6.59, 7.48},
    {11, 18, 7.23, 0.52, 6.22, 8.14},
};

constexpr GrowthStage band(int stage, double age, double mean, double sd) {
    return {stage, age, mean, sd, mean - 2 * sd, mean + 2 * sd};
}

// Rearing-table stages: mean age, length band mean +/- 2 sd.
constexpr GrowthStage kUnoStages[] = {
    band(1, 0, 1.92, 0.02),   band(2, 2, 1.99, 0.06),   band(3, 4, 2.14, 0.05),
    band(4, 7, 2.50, 0.08),   band(5, 10, 2.84, 0.07),  band(6, 14, 3.75, 0.37),
    band(7, 17, 4.06, 0.15),  band(8, 20, 4.68, 0.20),  band(9, 24, 6.07, 0.29),
    band(10, 28, 7.05, 0.52), band(11, 31, 7.73, 0.81),
};

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void validate(std::span<const GrowthObservation> observations) {
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& o = observations[i];
        if (!std::isfinite(o.age_days) || o.age_days < 0.0) {
            throw Error(ErrorCode::InvalidArgument,
                        "observation " + std::to_string(i + 1) + ": age must be finite and >= 0");
        }
        if (!(o.length_mm > 0.0 && o.length_mm < 50.0)) {
            throw Error(ErrorCode::InvalidArgument,
                        "observation " + std::to_string(i + 1) + ": length must lie in (0, 50) mm");
        }
    }
}

std::string_view to_string(GrowthModel model) noexcept {
    switch (model) {
    case GrowthModel::Vbgm: return "VBGM";
    case GrowthModel::Gompertz: return "Gompertz";
    case GrowthModel::Linear: return "Linear";
    case GrowthModel::Power: return "Power";
    case GrowthModel::Exponential: return "Exponential";
    }
    return "?";
}

std::optional<GrowthModel> parse_model(std::string_view name) noexcept {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    for (GrowthModel m : kAllModels) {
        std::string candidate(to_string(m));
        std::transform(candidate.begin(), candidate.end(), candidate.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        if (candidate == lower) {
            return m;
        }
    }
    return std::nullopt;
}

GrowthModel model_of(const GrowthParams& params) noexcept {
    return static_cast<GrowthModel>(params.index());
}

std::size_t parameter_count(GrowthModel model) noexcept {
    switch (model) {
    case GrowthModel::Vbgm: return 3;
    case GrowthModel::Gompertz: return 4;
    default: return 2;
    }
}

std::vector<std::string_view> parameter_names(GrowthModel model) {
    switch (model) {
    case GrowthModel::Vbgm: return {"L_inf", "k1", "t0"};
    case GrowthModel::Gompertz: return {"L_inf", "k2", "a", "tr"};
    default: return {"a", "b"};
    }
}

std::vector<double> to_vector(const GrowthParams& params) {
    struct {
        std::vector<double> operator()(const VbgmParams& p) const { return {p.l_inf, p.k1, p.t0}; }
        std::vector<double> operator()(const GompertzParams& p) const {
            return {p.l_inf, p.k2, p.a, p.tr};
        }
        std::vector<double> operator()(const LinearParams& p) const { return {p.a, p.b}; }
        std::vector<double> operator()(const PowerParams& p) const { return {p.a, p.b}; }
        std::vector<double> operator()(const ExponentialParams& p) const { return {p.a, p.b}; }
    } visitor;
    return std::visit(visitor, params);
}

GrowthParams from_vector(GrowthModel model, std::span<const double> v) {
    if (v.size() != parameter_count(model)) {
        throw Error(ErrorCode::InvalidArgument, "wrong parameter count for " +
                                                    std::string(to_string(model)));
    }
    switch (model) {
    case GrowthModel::Vbgm: return VbgmParams{v[0], v[1], v[2]};
    case GrowthModel::Gompertz: return GompertzParams{v[0], v[1], v[2], v[3]};
    case GrowthModel::Linear: return LinearParams{v[0], v[1]};
    case GrowthModel::Power: return PowerParams{v[0], v[1]};
    case GrowthModel::Exponential: return ExponentialParams{v[0], v[1]};
    }
    return LinearParams{};
}

double predict(const GrowthParams& params, double t) {
    struct {
        double t;
        double operator()(const VbgmParams& p) const {
            return p.l_inf * (1.0 - std::exp(-p.k1 * (t - p.t0)));
        }
        double operator()(const GompertzParams& p) const {
            return p.l_inf * std::exp(-p.k2 * std::exp(-p.a * (t - p.tr)));
        }
        double operator()(const LinearParams& p) const { return p.a * t + p.b; }
        double operator()(const PowerParams& p) const { return p.a * std::pow(t, p.b); }
        double operator()(const ExponentialParams& p) const { return p.a * std::exp(p.b * t); }
    } visitor{t};
    const double value = std::visit(visitor, params);
    if (!std::isfinite(value)) {
        throw Error(ErrorCode::NonFiniteResult,
                    std::string(to_string(model_of(params))) + " is not finite at t = " + fmt_g(t));
    }
    return value;
}

double sum_squared_error(std::span<const GrowthObservation> observations,
                         std::span<const double> predictions) {
    std::vector<double> lengths(observations.size());
    std::transform(observations.begin(), observations.end(), lengths.begin(),
                   [](const GrowthObservation& o) { return o.length_mm; });
    return kernels::sum_squared_diff(lengths, predictions);
}

double r_squared(std::span<const GrowthObservation> observations,
                 std::span<const double> predictions) {
    if (observations.size() != predictions.size()) {
        throw Error(ErrorCode::InvalidArgument, "observation and prediction counts differ");
    }
    if (observations.size() < 2) {
        throw Error(ErrorCode::InsufficientData, "R^2 needs at least two observations");
    }
    const double mean = std::accumulate(observations.begin(), observations.end(), 0.0,
                                        [](double s, const GrowthObservation& o) {
                                            return s + o.length_mm;
                                        }) /
                        static_cast<double>(observations.size());
    double sst = 0.0;
    for (const auto& o : observations) {
        sst += (o.length_mm - mean) * (o.length_mm - mean);
    }
    if (sst <= 0.0) {
        throw Error(ErrorCode::ZeroVariance, "all lengths are equal");
    }
    return 1.0 - sum_squared_error(observations, predictions) / sst;
}

std::vector<RankedFit> rank_models(std::span<const GrowthObservation> observations,
                                   const FitOptions& options, std::span<const GrowthModel> models) {
    validate(observations);
    if (observations.size() >= 2 &&
        std::all_of(observations.begin(), observations.end(), [&](const GrowthObservation& o) {
            return o.length_mm == observations.front().length_mm;
        })) {
        throw Error(ErrorCode::ZeroVariance, "all lengths are equal; no model can be ranked");
    }

    std::vector<RankedFit> ranked;
    for (GrowthModel model : models) {
        RankedFit entry;
        entry.kind = model;
        try {
            entry.result = fit(model, observations, options);
        } catch (const Error& e) {
            entry.error = e.code();
            entry.error_message = e.what();
        }
        ranked.push_back(std::move(entry));
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedFit& x, const RankedFit& y) {
        if (x.result.has_value() != y.result.has_value()) {
            return x.result.has_value();
        }
        if (!x.result) {
            return false;
        }
        if (x.result->r_squared != y.result->r_squared) {
            return x.result->r_squared > y.result->r_squared;
        }
        return parameter_count(x.kind) < parameter_count(y.kind);
    });
    return ranked;
}

std::span<const GrowthStage> stage_table(StageReference reference) noexcept {
    if (reference == StageReference::Uno1969) {
        return kUnoStages;
    }
    return kMeasuredStages;
}

std::vector<GrowthObservation> reference_observations() {
    std::vector<GrowthObservation> out;
    for (const auto& s : kMeasuredStages) {
        out.push_back({s.age_days, s.mean_mm});
    }
    return out;
}

StageLookup stage_for_length(double length_mm, StageReference reference) {
    if (!(length_mm > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "length must be positive");
    }
    StageLookup lookup;
    double best_gap = std::numeric_limits<double>::infinity();
    for (const auto& s : stage_table(reference)) {
        if (length_mm >= s.min_mm && length_mm <= s.max_mm) {
            lookup.stages.push_back(s.stage);
            continue;
        }
        const double gap = length_mm < s.min_mm ? s.min_mm - length_mm : length_mm - s.max_mm;
        if (gap < best_gap) {
            best_gap = gap;
            lookup.nearest = s.stage;
        }
    }
    if (!lookup.stages.empty()) {
        lookup.nearest.reset();
    }
    return lookup;
}

std::vector<GrowthObservation> parse_observations_csv(std::string_view csv_text) {
    const auto rows = io::parse_csv(csv_text);
    if (rows.empty()) {
        throw Error(ErrorCode::MissingColumn, "observation CSV has no header");
    }
    const auto& header = rows[0];
    auto column = [&](std::string_view name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw Error(ErrorCode::MissingColumn,
                        "observation CSV lacks column '" + std::string(name) + "'");
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t age_col = column("age_days");
    const std::size_t len_col = column("length_mm");

    auto number = [](const std::string& text, std::size_t row, const char* what) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
        if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
            throw Error(ErrorCode::MalformedRow,
                        "row " + std::to_string(row) + ": " + what + " '" + text + "' is not a number",
                        row);
        }
        return v;
    };

    std::vector<GrowthObservation> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != header.size()) {
            throw Error(ErrorCode::MalformedRow,
                        "row " + std::to_string(r + 1) + ": expected " +
                            std::to_string(header.size()) + " fields",
                        r + 1);
        }
        out.push_back({number(rows[r][age_col], r + 1, "age_days"),
                       number(rows[r][len_col], r + 1, "length_mm")});
    }
    validate(out);
    return out;
}

std::string fits_csv(std::span<const RankedFit> fits) {
    std::string out(kFitCsvHeader);
    out += '\n';
    for (const auto& f : fits) {
        out += std::string(to_string(f.kind)) + ',';
        const auto names = parameter_names(f.kind);
        for (std::size_t i = 0; i < names.size(); ++i) {
            out += (i ? ";" : "") + std::string(names[i]);
        }
        out += ',';
        if (!f.result) {
            out += ",,,false\n";
            continue;
        }
        const auto values = to_vector(f.result->params);
        for (std::size_t i = 0; i < values.size(); ++i) {
            out += (i ? ";" : "") + fmt_g(values[i]);
        }
        out += ',' + io::format_fixed(f.result->sse, 6) + ',' + io::format_fixed(f.result->r_squared, 6) +
               ',' + (f.result->converged ? "true" : "false") + '\n';
    }
    return out;
}

}  // namespace larvacount::growth
