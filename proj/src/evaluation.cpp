// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/evaluation.hpp"

#include "larvacount/error.hpp"
#include "larvacount/io.hpp"
#include "larvacount/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace larvacount::evaluation {
namespace {

void check_box(const AbsBox& b) {
    if (!(b.x_max > b.x_min) || !(b.y_max > b.y_min)) {
        throw Error(ErrorCode::DegenerateBox, "box has non-positive extent");
    }
}

double ratio(std::size_t num, std::size_t den) noexcept {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::vector<std::size_t> by_descending_confidence(std::span<const double> confidences) {
    std::vector<std::size_t> order(confidences.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return confidences[a] > confidences[b];
    });
    return order;
}

}  // namespace

void validate(const MatchConfig& config) {
    if (!(config.iou_threshold > 0.0 && config.iou_threshold < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "IoU threshold must lie in (0, 1)");
    }
    if (!(config.confidence_threshold >= 0.0 && config.confidence_threshold <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "confidence threshold must lie in [0, 1]");
    }
}

double iou(const AbsBox& a, const AbsBox& b) {
    check_box(a);
    check_box(b);
    return kernels::scalar::iou(a, b);
}

MatchResult match_detections(std::span<const GtBox> ground_truth,
                             std::span<const Detection> predictions, const MatchConfig& config) {
    validate(config);
    for (const auto& g : ground_truth) {
        check_box(g.box);
    }

    std::vector<std::size_t> kept;
    std::vector<double> confidences;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i].confidence >= config.confidence_threshold) {
            check_box(predictions[i].box);
            kept.push_back(i);
            confidences.push_back(predictions[i].confidence);
        }
    }

    std::vector<AbsBox> pred_boxes;
    std::vector<AbsBox> gt_boxes;
    pred_boxes.reserve(kept.size());
    gt_boxes.reserve(ground_truth.size());
    for (std::size_t k : kept) {
        pred_boxes.push_back(predictions[k].box);
    }
    for (const auto& g : ground_truth) {
        gt_boxes.push_back(g.box);
    }
    const std::size_t n_gt = gt_boxes.size();
    std::vector<double> ious(pred_boxes.size() * n_gt);
    kernels::iou_matrix(pred_boxes, gt_boxes, ious);

    MatchResult result;
    std::vector<bool> consumed(n_gt, false);
    for (std::size_t row : by_descending_confidence(confidences)) {
        const Detection& det = predictions[kept[row]];
        std::optional<std::size_t> best;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < n_gt; ++g) {
            if (consumed[g] || ground_truth[g].class_id != det.class_id) {
                continue;
            }
            if (ious[row * n_gt + g] > best_iou) {
                best_iou = ious[row * n_gt + g];
                best = g;
            }
        }
        PredictionOutcome outcome{kept[row], det.confidence, false, std::nullopt};
        if (best && best_iou >= config.iou_threshold) {
            consumed[*best] = true;
            outcome.true_positive = true;
            outcome.matched_gt = best;
            ++result.counts.tp;
        } else {
            ++result.counts.fp;
        }
        result.outcomes.push_back(outcome);
    }
    result.counts.fn = n_gt - result.counts.tp;
    return result;
}

MatchResult match_detections(const ImageAnnotation& annotation, const MatchConfig& config) {
    const double w = annotation.width_px;
    const double h = annotation.height_px;
    std::vector<GtBox> gt;
    std::vector<Detection> preds;
    gt.reserve(annotation.ground_truth.size());
    preds.reserve(annotation.predictions.size());
    for (const auto& g : annotation.ground_truth) {
        gt.push_back({to_absolute(g.box, w, h), g.class_id});
    }
    for (const auto& p : annotation.predictions) {
        preds.push_back({to_absolute(p.labeled.box, w, h), p.confidence, p.labeled.class_id});
    }
    return match_detections(gt, preds, config);
}

Metrics confusion_metrics(const ConfusionCounts& counts, std::size_t num_gt) {
    if (num_gt != counts.tp + counts.fn) {
        throw Error(ErrorCode::InconsistentCounts,
                    "num_gt " + std::to_string(num_gt) + " != tp + fn " +
                        std::to_string(counts.tp + counts.fn));
    }
    Metrics m;
    m.precision = ratio(counts.tp, counts.tp + counts.fp);
    m.recall = ratio(counts.tp, counts.tp + counts.fn);
    m.f1 = m.precision + m.recall > 0.0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    m.confusion_accuracy =
        ratio(counts.tp + counts.tn, counts.tp + counts.tn + counts.fp + counts.fn);
    m.counting_accuracy = ratio(counts.tp, num_gt);
    return m;
}

std::vector<PRPoint> pr_curve(std::span<const ScoredFlag> flags, std::size_t total_gt) {
    if (total_gt == 0) {
        throw Error(ErrorCode::NoGroundTruth, "precision-recall curve needs at least one ground truth");
    }
    std::vector<double> confidences;
    confidences.reserve(flags.size());
    for (const auto& f : flags) {
        confidences.push_back(f.confidence);
    }
    std::vector<PRPoint> curve;
    curve.reserve(flags.size());
    std::size_t cum_tp = 0;
    std::size_t cum_fp = 0;
    for (std::size_t i : by_descending_confidence(confidences)) {
        (flags[i].true_positive ? cum_tp : cum_fp) += 1;
        curve.push_back({flags[i].confidence, ratio(cum_tp, cum_tp + cum_fp), ratio(cum_tp, total_gt)});
    }
    return curve;
}

double average_precision(std::span<const PRPoint> curve, ApMethod method) {
    if (curve.empty()) {
        return 0.0;
    }
    // precision envelope: running maximum from the right
    std::vector<double> envelope(curve.size());
    double running = 0.0;
    for (std::size_t i = curve.size(); i-- > 0;) {
        running = std::max(running, curve[i].precision);
        envelope[i] = running;
    }

    if (method == ApMethod::Point101) {
        double sum = 0.0;
        std::size_t cursor = 0;
        for (int k = 0; k <= 100; ++k) {
            const double level = k / 100.0;
            while (cursor < curve.size() && curve[cursor].recall < level) {
                ++cursor;
            }
            sum += cursor < curve.size() ? envelope[cursor] : 0.0;
        }
        return sum / 101.0;
    }

    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < curve.size(); ++i) {
        ap += (curve[i].recall - prev_recall) * envelope[i];
        prev_recall = curve[i].recall;
    }
    return ap;
}

ImageReport evaluate_image(const ImageAnnotation& annotation, const MatchConfig& config) {
    ImageReport report;
    report.image_id = annotation.image_id;
    report.num_gt = annotation.ground_truth.size();
    report.num_predictions = annotation.predictions.size();
    report.counts = match_detections(annotation, config).counts;
    report.metrics = confusion_metrics(report.counts, report.num_gt);

    MatchConfig sweep = config;
    sweep.confidence_threshold = 0.0;
    for (const auto& o : match_detections(annotation, sweep).outcomes) {
        report.flags.push_back({o.confidence, o.true_positive});
    }
    if (report.num_gt > 0) {
        report.ap = average_precision(pr_curve(report.flags, report.num_gt), config.ap_method);
    }
    return report;
}

EvalReport aggregate(std::span<const ImageReport> images, const MatchConfig& config,
                     std::string group) {
    EvalReport row;
    row.group = std::move(group);
    row.num_images = images.size();
    std::vector<ScoredFlag> pooled;
    for (const auto& img : images) {
        row.num_gt += img.num_gt;
        row.counts += img.counts;
        pooled.insert(pooled.end(), img.flags.begin(), img.flags.end());
    }
    if (row.num_gt > 0) {
        row.curve = pr_curve(pooled, row.num_gt);
    }

    if (config.aggregation == Aggregation::Global || images.empty()) {
        row.metrics = confusion_metrics(row.counts, row.num_gt);
        row.ap = average_precision(row.curve, config.ap_method);
        return row;
    }

    Metrics mean;
    double ap_sum = 0.0;
    std::size_t ap_images = 0;
    for (const auto& img : images) {
        mean.precision += img.metrics.precision;
        mean.recall += img.metrics.recall;
        mean.f1 += img.metrics.f1;
        mean.confusion_accuracy += img.metrics.confusion_accuracy;
        mean.counting_accuracy += img.metrics.counting_accuracy;
        if (img.num_gt > 0) {
            ap_sum += img.ap;
            ++ap_images;
        }
    }
    const double n = static_cast<double>(images.size());
    mean.precision /= n;
    mean.recall /= n;
    mean.f1 /= n;
    mean.confusion_accuracy /= n;
    mean.counting_accuracy /= n;
    row.metrics = mean;
    row.ap = ap_images > 0 ? ap_sum / static_cast<double>(ap_images) : 0.0;
    return row;
}

std::vector<EvalReport> group_reports(std::span<const ImageReport> images,
                                      const MatchConfig& config, GroupBy group_by) {
    if (group_by == GroupBy::None) {
        return {aggregate(images, config)};
    }
    std::vector<std::string> keys;
    std::map<std::string, std::vector<ImageReport>> members;
    std::map<int, std::string> density_keys;
    for (const auto& img : images) {
        std::string key = "-";
        if (group_by == GroupBy::Day && img.day_label) {
            key = *img.day_label;
        } else if (group_by == GroupBy::Density && img.density_group) {
            key = std::to_string(*img.density_group);
            density_keys.emplace(*img.density_group, key);
        }
        auto [it, inserted] = members.try_emplace(key);
        if (inserted && group_by == GroupBy::Day) {
            keys.push_back(key);
        }
        it->second.push_back(img);
    }
    if (group_by == GroupBy::Density) {
        for (const auto& [density, key] : density_keys) {
            keys.push_back(key);
        }
        if (members.count("-")) {
            keys.push_back("-");
        }
    }
    std::vector<EvalReport> rows;
    for (const auto& key : keys) {
        rows.push_back(aggregate(members[key], config, key));
    }
    return rows;
}

DatasetEvaluation evaluate_dataset(const DatasetManifest& manifest, const MatchConfig& config,
                                   GroupBy group_by) {
    validate(config);
    DatasetEvaluation result;
    for (const auto& entry : manifest.entries) {
        ImageReport report;
        try {
            report = evaluate_image(load_image_annotation(entry), config);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::DegenerateBox) {
                throw Error(e.code(), "image '" + entry.image_id + "': " + e.what(), e.line());
            }
            throw;
        }
        report.density_group = entry.density_group;
        report.day_label = entry.day_label;
        result.images.push_back(std::move(report));
    }
    result.overall = aggregate(result.images, config);
    result.groups = group_reports(result.images, config, group_by);
    return result;
}

std::string eval_csv(std::span<const EvalReport> rows) {
    std::string out(kEvalCsvHeader);
    out += '\n';
    for (const auto& r : rows) {
        out += io::csv_field(r.group) + ',' + std::to_string(r.num_images) + ',' +
               std::to_string(r.num_gt) + ',' + std::to_string(r.counts.tp) + ',' +
               std::to_string(r.counts.fp) + ',' + std::to_string(r.counts.fn) + ',' +
               io::format_fixed(r.metrics.precision, 4) + ',' + io::format_fixed(r.metrics.recall, 4) +
               ',' + io::format_fixed(r.metrics.f1, 4) + ',' +
               io::format_fixed(r.metrics.confusion_accuracy, 5) + ',' +
               io::format_fixed(r.metrics.counting_accuracy, 4) + ',' + io::format_fixed(r.ap, 4) +
               '\n';
    }
    return out;
}

std::string pr_curve_csv(std::span<const PRPoint> curve) {
    std::string out = "confidence,recall,precision\n";
    for (const auto& p : curve) {
        out += io::format_fixed(p.confidence, 6) + ',' + io::format_fixed(p.recall, 6) + ',' +
               io::format_fixed(p.precision, 6) + '\n';
    }
    return out;
}

}  // namespace larvacount::evaluation
