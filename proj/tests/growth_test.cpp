// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/error.hpp"
#include "larvacount/growth.hpp"
#include "larvacount/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace larvacount::growth {
namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no Error thrown";
    return ErrorCode::Io;
}

std::vector<double> predictions(const GrowthParams& p, std::span<const GrowthObservation> obs) {
    std::vector<double> out;
    for (const auto& o : obs) {
        out.push_back(predict(p, o.age_days));
    }
    return out;
}

std::vector<GrowthObservation> synthetic(const GrowthParams& p) {
    std::vector<GrowthObservation> obs;
    for (double t : {0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 9.0, 12.0, 15.0, 18.0, 21.0}) {
        obs.push_back({t, predict(p, t)});
    }
    return obs;
}

TEST(Predict, ReferenceCurves) {
    EXPECT_NEAR(predict(GompertzParams{9.238, 1.933, 0.122, 0.00004}, 0.0), 1.337, 0.0005);
    EXPECT_NEAR(predict(VbgmParams{27.217, 0.0156, -3.229}, 18.0), 7.67, 0.01);
    EXPECT_EQ(predict(PowerParams{1.191, 0.638}, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(predict(LinearParams{0.5, 1.0}, 4.0), 3.0);
    EXPECT_DOUBLE_EQ(predict(ExponentialParams{2.0, 0.0}, 9.0), 2.0);
}

TEST(Predict, OverflowIsReported) {
    EXPECT_EQ(code_of([] { predict(ExponentialParams{1.0, 1000.0}, 10.0); }),
              ErrorCode::NonFiniteResult);
}

TEST(Params, VectorRoundTripAndNames) {
    const GrowthParams p = GompertzParams{9.0, 1.9, 0.12, 0.5};
    EXPECT_EQ(model_of(p), GrowthModel::Gompertz);
    const auto v = to_vector(p);
    ASSERT_EQ(v.size(), parameter_count(GrowthModel::Gompertz));
    EXPECT_EQ(to_vector(from_vector(GrowthModel::Gompertz, v)), v);
    EXPECT_EQ(parameter_names(GrowthModel::Linear).size(), 2u);
    EXPECT_EQ(parse_model("GOMPERTZ"), GrowthModel::Gompertz);
    EXPECT_EQ(parse_model("vbgm"), GrowthModel::Vbgm);
    EXPECT_FALSE(parse_model("logistic").has_value());
}

TEST(RSquared, Definitions) {
    const auto obs = reference_observations();
    std::vector<double> exact;
    double mean = 0.0;
    for (const auto& o : obs) {
        exact.push_back(o.length_mm);
        mean += o.length_mm;
    }
    mean /= static_cast<double>(obs.size());
    EXPECT_EQ(r_squared(obs, exact), 1.0);
    EXPECT_NEAR(r_squared(obs, std::vector<double>(obs.size(), mean)), 0.0, 1e-12);
    const std::vector<GrowthObservation> flat = {{0, 2.0}, {1, 2.0}, {2, 2.0}};
    EXPECT_EQ(code_of([&] { r_squared(flat, std::vector<double>{2, 2, 2}); }), ErrorCode::ZeroVariance);
}

TEST(RSquared, ReferenceCurvesOnStageMeans) {
    // Only the curves whose printed parameters reproduce their own table.
    const auto obs = reference_observations();
    EXPECT_NEAR(r_squared(obs, predictions(VbgmParams{27.217, 0.0156, -3.229}, obs)), 0.973, 0.015);
    EXPECT_NEAR(r_squared(obs, predictions(GompertzParams{9.238, 1.933, 0.122, -0.00004}, obs)),
                0.983, 0.015);
    EXPECT_NEAR(r_squared(obs, predictions(LinearParams{0.352, 1.479}, obs)), 0.969, 0.015);
}

TEST(Fit, LinearClosedFormOnStageMeans) {
    const auto r = fit(GrowthModel::Linear, reference_observations());
    const auto& p = std::get<LinearParams>(r.params);
    EXPECT_NEAR(p.a, 0.352, 0.001);
    EXPECT_NEAR(p.b, 1.478, 0.01);
    EXPECT_NEAR(r.r_squared, 0.969, 0.003);
    EXPECT_TRUE(r.converged);
}

TEST(Fit, SigmoidFamiliesOnStageMeans) {
    const auto obs = reference_observations();
    const auto g = fit(GrowthModel::Gompertz, obs);
    EXPECT_NEAR(g.r_squared, 0.983, 0.01);
    EXPECT_TRUE(g.converged);
    EXPECT_NEAR(predict(g.params, 0.0), 1.337, 0.2);
    const auto v = fit(GrowthModel::Vbgm, obs);
    EXPECT_NEAR(v.r_squared, 0.973, 0.01);
}

TEST(Fit, SseTraceNeverIncreases) {
    const auto obs = reference_observations();
    for (GrowthModel m : kAllModels) {
        const auto r = fit(m, obs);
        ASSERT_FALSE(r.sse_trace.empty());
        for (std::size_t i = 1; i < r.sse_trace.size(); ++i) {
            EXPECT_LE(r.sse_trace[i], r.sse_trace[i - 1]) << to_string(m) << " step " << i;
        }
        EXPECT_NEAR(r.sse, r.sse_trace.back(), 1e-12 * std::max(1.0, r.sse));
        EXPECT_LE(r.iterations, FitOptions{}.max_iterations);
    }
}

TEST(Fit, RecoversExactModelData) {
    const std::vector<GrowthParams> truths = {
        VbgmParams{12.0, 0.08, -1.5}, GompertzParams{9.0, 1.8, 0.15, 1.0},
        LinearParams{0.4, 1.2}, PowerParams{1.3, 0.6}, ExponentialParams{1.5, 0.09}};
    for (const auto& truth : truths) {
        const auto obs = synthetic(truth);
        FitOptions opts;
        opts.max_iterations = 2000;
        const auto r = fit(model_of(truth), obs, opts);
        for (const auto& o : obs) {
            EXPECT_NEAR(predict(r.params, o.age_days), o.length_mm, 1e-6)
                << to_string(model_of(truth)) << " at t=" << o.age_days;
        }
    }
}

TEST(Fit, MultiStartNeverWorse) {
    const auto obs = reference_observations();
    FitOptions multi;
    multi.multi_start = true;
    for (GrowthModel m : kAllModels) {
        EXPECT_LE(fit(m, obs, multi).sse, fit(m, obs).sse + 1e-12) << to_string(m);
    }
}

TEST(Fit, InputErrors) {
    const std::vector<GrowthObservation> one = {{1.0, 2.0}};
    EXPECT_EQ(code_of([&] { fit(GrowthModel::Linear, one); }), ErrorCode::InsufficientData);
    const std::vector<GrowthObservation> same_age = {{3.0, 2.0}, {3.0, 2.5}, {3.0, 3.0}, {3.0, 2.2},
                                                     {3.0, 2.4}};
    EXPECT_EQ(code_of([&] { fit(GrowthModel::Linear, same_age); }),
              ErrorCode::SingularNormalEquations);
    EXPECT_EQ(code_of([&] { fit(GrowthModel::Gompertz, same_age); }),
              ErrorCode::SingularNormalEquations);
    const std::vector<GrowthObservation> bad = {{0, 1}, {1, 60}, {2, 3}};
    EXPECT_THROW(fit(GrowthModel::Linear, bad), Error);
}

TEST(Rank, ExpectedOrderingOnStageMeans) {
    const auto ranked = rank_models(reference_observations());
    ASSERT_EQ(ranked.size(), 5u);
    const std::vector<GrowthModel> expected = {GrowthModel::Gompertz, GrowthModel::Vbgm,
                                               GrowthModel::Linear, GrowthModel::Power,
                                               GrowthModel::Exponential};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(ranked[i].kind, expected[i]);
        EXPECT_TRUE(ranked[i].result.has_value());
    }
}

TEST(Rank, LinearDataRanksLinearFirst) {
    const auto ranked = rank_models(synthetic(LinearParams{0.35, 1.5}));
    EXPECT_EQ(ranked[0].kind, GrowthModel::Linear);
    EXPECT_NEAR(ranked[0].result->r_squared, 1.0, 1e-12);
}

TEST(Rank, ConstantLengthsPropagateZeroVariance) {
    const std::vector<GrowthObservation> flat = {{0, 2.0}, {1, 2.0}, {2, 2.0}, {3, 2.0}, {4, 2.0}};
    EXPECT_EQ(code_of([&] { rank_models(flat); }), ErrorCode::ZeroVariance);
}

TEST(Rank, FailedFamiliesGoLastWithError) {
    const std::vector<GrowthObservation> three = {{0, 1.0}, {1, 1.5}, {2, 2.1}};
    const auto ranked = rank_models(three);
    ASSERT_EQ(ranked.size(), 5u);
    // three points only support the two-parameter families
    EXPECT_EQ(ranked[3].kind, GrowthModel::Vbgm);
    EXPECT_EQ(ranked[3].error, ErrorCode::InsufficientData);
    EXPECT_EQ(ranked.back().kind, GrowthModel::Gompertz);
    EXPECT_EQ(ranked.back().error, ErrorCode::InsufficientData);
    EXPECT_FALSE(ranked.back().result.has_value());
}

TEST(Rank, LengthRescalingPreservesOrdering) {
    const auto obs = reference_observations();
    auto scaled = obs;
    for (auto& o : scaled) {
        o.length_mm *= 2.5;
    }
    const auto a = rank_models(obs);
    const auto b = rank_models(scaled);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].kind, b[i].kind);
        EXPECT_NEAR(a[i].result->r_squared, b[i].result->r_squared, 1e-6);
    }
}

TEST(Rank, AgeShiftLeavesOffsetFamiliesUnchanged) {
    // families with a free time offset absorb a shift of the origin
    const auto obs = reference_observations();
    auto shifted = obs;
    for (auto& o : shifted) {
        o.age_days += 3.0;
    }
    for (GrowthModel m : {GrowthModel::Linear, GrowthModel::Vbgm, GrowthModel::Gompertz}) {
        EXPECT_NEAR(fit(m, obs).r_squared, fit(m, shifted).r_squared, 1e-6) << to_string(m);
    }
}

TEST(Jacobian, ForwardDifferenceAgreesWithCentralDifference) {
    std::vector<double> ages;
    for (const auto& o : reference_observations()) {
        ages.push_back(o.age_days);
    }
    const std::vector<GrowthParams> points = {
        VbgmParams{27.217, 0.0156, -3.229}, GompertzParams{9.238, 1.933, 0.122, 0.5},
        LinearParams{0.352, 1.479}, PowerParams{1.191, 0.638}, ExponentialParams{1.528, 0.095}};
    for (const auto& p : points) {
        const GrowthModel m = model_of(p);
        const auto theta = to_vector(p);
        const auto fwd = forward_jacobian(m, theta, ages);
        ASSERT_EQ(fwd.size(), ages.size() * theta.size());
        for (std::size_t j = 0; j < theta.size(); ++j) {
            const double h = 1e-5 * std::max(1.0, std::abs(theta[j]));
            auto up = theta;
            auto down = theta;
            up[j] += h;
            down[j] -= h;
            for (std::size_t i = 0; i < ages.size(); ++i) {
                const double central = (predict(from_vector(m, up), ages[i]) -
                                        predict(from_vector(m, down), ages[i])) / (2 * h);
                const double f = fwd[i * theta.size() + j];
                EXPECT_NEAR(f, central, 1e-4 * std::max(1.0, std::abs(central)))
                    << to_string(m) << " param " << j << " age " << ages[i];
            }
        }
    }
}

TEST(Fit, SigmoidFitsIncreaseOverFortyDays) {
    const auto obs = reference_observations();
    for (GrowthModel m : {GrowthModel::Vbgm, GrowthModel::Gompertz}) {
        const auto r = fit(m, obs);
        double prev = predict(r.params, 0.0);
        for (double t = 0.5; t <= 40.0; t += 0.5) {
            const double v = predict(r.params, t);
            EXPECT_GT(v, prev) << to_string(m) << " at " << t;
            prev = v;
        }
    }
}

TEST(Stages, MeasuredTableLookup) {
    // intervals are closed: 1.60 is also the stage-2 minimum
    EXPECT_EQ(stage_for_length(1.58).stages, std::vector<int>{1});
    EXPECT_EQ(stage_for_length(1.60).stages, (std::vector<int>{1, 2}));
    EXPECT_EQ(stage_for_length(7.0).stages, (std::vector<int>{10, 11}));
    const auto below = stage_for_length(0.5);
    EXPECT_TRUE(below.stages.empty());
    EXPECT_EQ(below.nearest, 1);
    EXPECT_EQ(stage_table().size(), 11u);
}

TEST(Stages, RearingTableUsesTwoSdBands) {
    for (const auto& s : stage_table(StageReference::Uno1969)) {
        EXPECT_NEAR(s.min_mm, s.mean_mm - 2 * s.sd_mm, 1e-12);
        EXPECT_NEAR(s.max_mm, s.mean_mm + 2 * s.sd_mm, 1e-12);
        const auto hit = stage_for_length(s.mean_mm, StageReference::Uno1969).stages;
        EXPECT_NE(std::find(hit.begin(), hit.end(), s.stage), hit.end());
    }
}

TEST(Stages, ReferenceObservationsMatchBundledFixture) {
    const auto bundled =
        parse_observations_csv(io::read_file(std::string(LARVACOUNT_DATA_DIR) + "/stage_means.csv"));
    const auto ref = reference_observations();
    ASSERT_EQ(bundled.size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        EXPECT_EQ(bundled[i].age_days, ref[i].age_days);
        EXPECT_EQ(bundled[i].length_mm, ref[i].length_mm);
    }
}

TEST(ObservationsCsv, ColumnsAndErrors) {
    const auto obs = parse_observations_csv("length_mm,age_days\n2.5,1\n3.0,2\n");
    ASSERT_EQ(obs.size(), 2u);
    EXPECT_EQ(obs[1].age_days, 2.0);
    EXPECT_EQ(obs[1].length_mm, 3.0);
    EXPECT_THROW(parse_observations_csv("age,length\n1,2\n"), Error);
    EXPECT_THROW(parse_observations_csv("age_days,length_mm\n1,x\n"), Error);
}

TEST(FitsCsv, HeaderAndFailureRow) {
    const std::vector<GrowthObservation> three = {{0, 1.0}, {1, 1.5}, {2, 2.1}};
    const auto csv = fits_csv(rank_models(three));
    EXPECT_EQ(csv.rfind(std::string(kFitCsvHeader) + "\n", 0), 0u);
    EXPECT_NE(csv.find("Gompertz"), std::string::npos);
}

}  // namespace
}  // namespace larvacount::growth
