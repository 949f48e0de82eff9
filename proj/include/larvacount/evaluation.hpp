// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "larvacount/annotations.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace larvacount::evaluation {

enum class Aggregation {
    /// Pool every prediction of a group into one match set and one curve.
    Global,
    /// Average the per-image metrics and APs of a group.
    PerImageMean,
};

enum class ApMethod {
    /// Area under the monotone precision envelope at every recall step.
    AllPoint,
    /// Mean envelope precision sampled at recall 0, 0.01, ..., 1.
    Point101,
};

enum class GroupBy { None, Day, Density };

struct MatchConfig {
    double iou_threshold = 0.5;
    double confidence_threshold = 0.4;
    Aggregation aggregation = Aggregation::Global;
    ApMethod ap_method = ApMethod::AllPoint;
};

/// Throws Error{InvalidArgument} when a threshold is out of range.
void validate(const MatchConfig& config);

struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;  // always 0 for detection

    ConfusionCounts& operator+=(const ConfusionCounts& other) noexcept {
        tp += other.tp;
        fp += other.fp;
        fn += other.fn;
        tn += other.tn;
        return *this;
    }
    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    /// (TP + TN) / (TP + TN + FP + FN).
    double confusion_accuracy = 0.0;
    /// TP / number of ground-truth objects; identical to recall.
    double counting_accuracy = 0.0;
};

struct GtBox {
    AbsBox box;
    std::uint32_t class_id = 0;
};

struct Detection {
    AbsBox box;
    double confidence = 0.0;
    std::uint32_t class_id = 0;
};

/// A prediction's confidence and its match outcome.
struct ScoredFlag {
    double confidence = 0.0;
    bool true_positive = false;
};

struct PredictionOutcome {
    std::size_t prediction_index = 0;  // index into the input predictions
    double confidence = 0.0;
    bool true_positive = false;
    std::optional<std::size_t> matched_gt;
};

struct MatchResult {
    ConfusionCounts counts;
    /// Accepted predictions in processing order (descending confidence,
    /// ties by input order).
    std::vector<PredictionOutcome> outcomes;
};

struct PRPoint {
    double confidence = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

/// Intersection over union. Throws Error{DegenerateBox} for boxes with
/// non-positive extent.
double iou(const AbsBox& a, const AbsBox& b);

/// Greedy matching: predictions with confidence >= confidence_threshold are
/// visited by descending confidence; each claims the unmatched ground truth
/// of the same class with the highest IoU (lowest index on ties) and is a TP
/// when that IoU >= iou_threshold, otherwise an FP. Leftover ground truth
/// counts as FN.
MatchResult match_detections(std::span<const GtBox> ground_truth,
                             std::span<const Detection> predictions, const MatchConfig& config);
MatchResult match_detections(const ImageAnnotation& annotation, const MatchConfig& config);

/// Throws Error{InconsistentCounts} unless num_gt == tp + fn. Ratios with a
/// zero denominator are reported as 0.
Metrics confusion_metrics(const ConfusionCounts& counts, std::size_t num_gt);

/// One point per flag in descending confidence order (stable for ties).
/// Throws Error{NoGroundTruth} when total_gt is 0.
std::vector<PRPoint> pr_curve(std::span<const ScoredFlag> flags, std::size_t total_gt);

double average_precision(std::span<const PRPoint> curve, ApMethod method = ApMethod::AllPoint);

struct ImageReport {
    std::string image_id;
    std::optional<int> density_group;
    std::optional<std::string> day_label;
    std::size_t num_gt = 0;
    std::size_t num_predictions = 0;  // before confidence filtering
    ConfusionCounts counts;           // at the configured confidence threshold
    Metrics metrics;
    double ap = 0.0;                  // 0 when the image has no ground truth
    std::vector<ScoredFlag> flags;    // every prediction, matched at confidence 0
};

struct EvalReport {
    std::string group;
    std::size_t num_images = 0;
    std::size_t num_gt = 0;
    ConfusionCounts counts;
    Metrics metrics;
    double ap = 0.0;
    std::vector<PRPoint> curve;  // pooled over the group
};

ImageReport evaluate_image(const ImageAnnotation& annotation, const MatchConfig& config);

/// Aggregates per-image reports into one row labelled `group`.
EvalReport aggregate(std::span<const ImageReport> images, const MatchConfig& config,
                     std::string group = "all");

/// One row per group. Density groups come out ascending, day labels in order
/// of first appearance; images without the grouping key fall in group "-".
std::vector<EvalReport> group_reports(std::span<const ImageReport> images,
                                      const MatchConfig& config, GroupBy group_by);

struct DatasetEvaluation {
    std::vector<ImageReport> images;
    EvalReport overall;
    std::vector<EvalReport> groups;
};

/// Loads every manifest entry and evaluates it. Load errors name the image.
DatasetEvaluation evaluate_dataset(const DatasetManifest& manifest, const MatchConfig& config,
                                   GroupBy group_by = GroupBy::None);

inline constexpr std::string_view kEvalCsvHeader =
    "group,num_images,num_gt,tp,fp,fn,precision,recall,f1,confusion_accuracy,counting_accuracy,ap";

std::string eval_csv(std::span<const EvalReport> rows);
std::string pr_curve_csv(std::span<const PRPoint> curve);

}  // namespace larvacount::evaluation
