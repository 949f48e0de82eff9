// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include "larvacount/annotations.hpp"
#include "larvacount/counting.hpp"
#include "larvacount/error.hpp"
#include "larvacount/evaluation.hpp"
#include "larvacount/growth.hpp"
#include "larvacount/io.hpp"
#include "larvacount/plot.hpp"
#include "larvacount/preprocessing.hpp"
#include "larvacount/raster.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace larvacount::cli {
namespace fs = std::filesystem;
namespace {

const CLI::Validator kOpenUnit(
    [](std::string& value) -> std::string {
        double v = 0.0;
        try {
            v = std::stod(value);
        } catch (const std::exception&) {
            return "value " + value + " is not a number";
        }
        return v > 0.0 && v < 1.0 ? std::string() : "value " + value + " not in (0, 1)";
    },
    "in (0, 1)");

// "all" or a comma list of family names; nullopt on an unknown name.
std::optional<std::vector<growth::GrowthModel>> parse_model_list(std::string_view text) {
    if (text == "all") {
        return std::vector<growth::GrowthModel>(growth::kAllModels.begin(), growth::kAllModels.end());
    }
    std::vector<growth::GrowthModel> models;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const auto model = growth::parse_model(text.substr(0, comma));
        if (!model) {
            return std::nullopt;
        }
        models.push_back(*model);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    }
    if (models.empty()) {
        return std::nullopt;
    }
    return models;
}

const CLI::Validator kModelList(
    [](std::string& value) -> std::string {
        return parse_model_list(value) ? std::string() : "unknown model in '" + value + "'";
    },
    "all|vbgm,gompertz,linear,power,exponential");

struct EvalArgs {
    std::string manifest;
    double iou_thr = 0.5;
    double conf_thr = 0.4;
    std::string aggregation = "global";
    std::string group_by = "none";
    std::string ap_method = "all-point";
    std::string out_dir = ".";
};

struct PreprocessArgs {
    std::string action;
    std::string manifest;
    std::string image;
    std::string labels;
    std::string preds;
    std::string out_dir = ".";
    int width = 0;
    int height = 0;
    double cx = 0.0;
    double cy = 0.0;
    double radius = 0.0;
    double variance = 0.0;
    std::uint64_t seed = 0;
    std::optional<double> threshold_area;
    std::optional<double> quantile;
    std::string mode = "literal";
};

struct CountArgs {
    std::string manifest;
    double conf_thr = 0.4;
    double volume_factor = counting::kDefaultVolumeFactor;
    std::string out_dir = ".";
};

struct FitArgs {
    std::string csv;
    std::string models = "all";
    bool multi_start = false;
    std::string svg;
    std::string out_dir = ".";
};

DatasetManifest read_manifest(const std::string& path) {
    return load_manifest(io::read_file(path));
}

fs::path prepare_out_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw Error(ErrorCode::Io, "cannot create output directory '" + dir + "': " + ec.message());
    }
    return fs::path(dir);
}

evaluation::MatchConfig match_config(const EvalArgs& a) {
    evaluation::MatchConfig config;
    config.iou_threshold = a.iou_thr;
    config.confidence_threshold = a.conf_thr;
    config.aggregation = a.aggregation == "per-image-mean" ? evaluation::Aggregation::PerImageMean
                                                           : evaluation::Aggregation::Global;
    config.ap_method =
        a.ap_method == "101-point" ? evaluation::ApMethod::Point101 : evaluation::ApMethod::AllPoint;
    return config;
}

void print_summary(std::ostream& out, const evaluation::EvalReport& r) {
    out << "images=" << r.num_images << " gt=" << r.num_gt << " tp=" << r.counts.tp
        << " fp=" << r.counts.fp << " fn=" << r.counts.fn
        << " precision=" << io::format_fixed(r.metrics.precision, 4)
        << " recall=" << io::format_fixed(r.metrics.recall, 4)
        << " f1=" << io::format_fixed(r.metrics.f1, 4)
        << " confusion_accuracy=" << io::format_fixed(r.metrics.confusion_accuracy, 5)
        << " counting_accuracy=" << io::format_fixed(r.metrics.counting_accuracy, 4)
        << " ap=" << io::format_fixed(r.ap, 4) << '\n';
}

int run_eval(const EvalArgs& a, std::ostream& out) {
    const auto config = match_config(a);
    const auto group_by = a.group_by == "day"       ? evaluation::GroupBy::Day
                          : a.group_by == "density" ? evaluation::GroupBy::Density
                                                    : evaluation::GroupBy::None;
    const auto result = evaluation::evaluate_dataset(read_manifest(a.manifest), config, group_by);
    const fs::path dir = prepare_out_dir(a.out_dir);

    std::vector<evaluation::EvalReport> rows = result.groups;
    if (group_by != evaluation::GroupBy::None) {
        rows.push_back(result.overall);
    }
    io::write_file(dir / "eval.csv", evaluation::eval_csv(rows));
    io::write_file(dir / "pr_curve.csv", evaluation::pr_curve_csv(result.overall.curve));
    print_summary(out, result.overall);
    return kSuccess;
}

// File-name-safe form of an image id.
std::string safe_name(const std::string& id) {
    std::string name = id;
    for (char& c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') {
            c = '_';
        }
    }
    return name;
}

std::uint64_t image_seed(std::uint64_t seed, const std::string& image_id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (unsigned char c : image_id) {
        h = (h ^ c) * 0x100000001b3ULL;
    }
    return seed ^ h;
}

void refuse_overwrite(const fs::path& target, const std::vector<std::string>& inputs) {
    for (const auto& in : inputs) {
        std::error_code ec;
        if (!in.empty() && fs::exists(target) && fs::equivalent(target, in, ec)) {
            throw Error(ErrorCode::Io, "refusing to overwrite input '" + in + "'");
        }
    }
}

int run_preprocess(const PreprocessArgs& a, std::ostream& out) {
    DatasetManifest manifest;
    if (!a.manifest.empty()) {
        manifest = read_manifest(a.manifest);
    } else {
        ManifestEntry e;
        e.image_id = fs::path(a.image.empty() ? a.labels : a.image).stem().string();
        e.image_path = a.image;
        e.gt_path = a.labels;
        e.pred_path = a.preds;
        if (!a.image.empty()) {
            const auto raster = decode_raster(io::read_file(a.image));
            e.width_px = raster.width();
            e.height_px = raster.height();
        } else if (a.action == "crop" || a.action == "rotate") {
            throw Error(ErrorCode::InvalidArgument, a.action + " needs --image or --manifest");
        }
        manifest.entries.push_back(std::move(e));
    }

    const fs::path dir = prepare_out_dir(a.out_dir);
    std::vector<ImageAnnotation> annotations;
    for (const auto& e : manifest.entries) {
        annotations.push_back(load_image_annotation(e));
    }

    std::optional<preprocessing::EnlargeConfig> enlarge;
    if (a.action == "enlarge") {
        preprocessing::EnlargeConfig cfg;
        cfg.mode = a.mode == "normalize" ? preprocessing::EnlargeMode::Normalize
                                         : preprocessing::EnlargeMode::Literal;
        if (a.threshold_area) {
            cfg.threshold_area = *a.threshold_area;
        } else {
            std::vector<LabeledBox> all;
            for (const auto& ann : annotations) {
                all.insert(all.end(), ann.ground_truth.begin(), ann.ground_truth.end());
            }
            cfg.threshold_area = preprocessing::area_quantile(all, a.quantile.value_or(0.25));
        }
        out << "threshold_area=" << io::format_fixed(cfg.threshold_area, 8) << '\n';
        enlarge = cfg;
    }

    DatasetManifest written;
    for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
        const ManifestEntry& in = manifest.entries[i];
        ImageAnnotation ann = annotations[i];
        std::optional<RasterImage> raster;
        if (!in.image_path.empty() && a.action != "enlarge") {
            raster = decode_raster(io::read_file(in.image_path));
            if (raster->width() != in.width_px || raster->height() != in.height_px) {
                throw Error(ErrorCode::InvalidArgument,
                            "image '" + in.image_id + "': raster size differs from manifest");
            }
        }

        if (a.action == "crop") {
            if (raster) {
                auto t = preprocessing::center_crop(*raster, ann, a.width, a.height);
                raster = std::move(t.image);
                ann = std::move(t.annotation);
            } else {
                ann = preprocessing::center_crop(ann, a.width, a.height);
            }
        } else if (a.action == "rotate") {
            if (raster) {
                raster = preprocessing::rotate90(*raster);
            }
            ann = preprocessing::rotate90(ann);
        } else if (a.action == "mask") {
            if (raster) {
                raster = preprocessing::circular_mask(*raster, a.cx, a.cy, a.radius);
            }
        } else if (a.action == "noise") {
            if (raster) {
                raster = preprocessing::add_gaussian_noise(
                    *raster, {a.variance, image_seed(a.seed, in.image_id)});
            }
        } else if (a.action == "enlarge") {
            ann = preprocessing::enlarge_small_boxes(ann, *enlarge);
        }

        ManifestEntry e = in;
        e.width_px = ann.width_px;
        e.height_px = ann.height_px;
        const std::string stem = safe_name(in.image_id);
        const std::vector<std::string> inputs = {in.image_path, in.gt_path, in.pred_path};
        if (raster) {
            const fs::path p = dir / (stem + (raster->channels() == 3 ? ".ppm" : ".pgm"));
            refuse_overwrite(p, inputs);
            io::write_file(p, encode_raster(*raster));
            e.image_path = p.string();
        }
        if (!in.gt_path.empty()) {
            const fs::path p = dir / (stem + ".txt");
            refuse_overwrite(p, inputs);
            io::write_file(p, serialize_labels(ann.ground_truth));
            e.gt_path = p.string();
        }
        if (!in.pred_path.empty()) {
            const fs::path p = dir / (stem + ".pred.txt");
            refuse_overwrite(p, inputs);
            io::write_file(p, serialize_labels(ann.predictions));
            e.pred_path = p.string();
        }
        written.entries.push_back(std::move(e));
    }
    const fs::path manifest_out = dir / "manifest.csv";
    refuse_overwrite(manifest_out, {a.manifest});
    io::write_file(manifest_out, serialize_manifest(written));
    out << a.action << ": wrote " << written.entries.size() << " entries to " << dir.string() << '\n';
    return kSuccess;
}

int run_count(const CountArgs& a, std::ostream& out) {
    const auto manifest = read_manifest(a.manifest);
    std::vector<counting::CountRecord> records;
    std::size_t total = 0;
    for (const auto& e : manifest.entries) {
        records.push_back(
            counting::count_image(load_image_annotation(e), a.conf_thr, !e.gt_path.empty()));
        total += records.back().predicted_count;
    }
    const fs::path dir = prepare_out_dir(a.out_dir);
    io::write_file(dir / "counts.csv", counting::count_csv(records, a.volume_factor));
    const auto pond = counting::extrapolate_pond(total, a.volume_factor);
    out << "images=" << records.size() << " predicted=" << total
        << " estimated_total=" << io::format_fixed(pond.estimated_total, 1) << '\n';
    return kSuccess;
}

int run_fit(const FitArgs& a, std::ostream& out) {
    const auto observations = growth::parse_observations_csv(io::read_file(a.csv));
    const auto models = *parse_model_list(a.models);
    growth::FitOptions options;
    options.multi_start = a.multi_start;
    const auto ranked = growth::rank_models(observations, options, models);
    for (const auto& r : ranked) {
        if (!r.result) {
            throw Error(*r.error, std::string(growth::to_string(r.kind)) + ": " + r.error_message);
        }
    }

    const fs::path dir = prepare_out_dir(a.out_dir);
    io::write_file(dir / "fits.csv", growth::fits_csv(ranked));
    if (!a.svg.empty()) {
        const fs::path svg = fs::path(a.svg).is_absolute() ? fs::path(a.svg) : dir / a.svg;
        io::write_file(svg, plot::growth_svg(observations, ranked));
    }
    for (const auto& r : ranked) {
        out << growth::to_string(r.kind) << " r_squared=" << io::format_fixed(r.result->r_squared, 4)
            << " sse=" << io::format_fixed(r.result->sse, 4)
            << (r.result->converged ? "" : " (not converged)") << '\n';
    }
    return kSuccess;
}

int run_report(const EvalArgs& a, std::ostream& out) {
    const auto result = evaluation::evaluate_dataset(read_manifest(a.manifest), match_config(a));
    const auto report = counting::density_summary(result.images);
    const fs::path dir = prepare_out_dir(a.out_dir);
    io::write_file(dir / "density.csv", counting::density_csv(report));
    out << counting::density_csv(report);
    out << "accuracy_decreases_with_density="
        << (report.accuracy_decreases_with_density ? "true" : "false") << '\n';
    return kSuccess;
}

void add_match_flags(CLI::App* cmd, EvalArgs& a) {
    cmd->add_option("--iou-thr", a.iou_thr, "IoU threshold for a true positive")
        ->check(kOpenUnit)
        ->capture_default_str();
    cmd->add_option("--conf-thr", a.conf_thr, "minimum confidence of a counted detection")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    cmd->add_option("--ap-method", a.ap_method, "AP integration")
        ->check(CLI::IsMember({"all-point", "101-point"}))
        ->capture_default_str();
    cmd->add_option("--aggregation", a.aggregation, "pool predictions or average per image")
        ->check(CLI::IsMember({"global", "per-image-mean"}))
        ->capture_default_str();
    cmd->add_option("--out-dir", a.out_dir, "directory for output files")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Larvae detection evaluation, counting and growth-model fitting"};
    app.name("larvacount");
    app.require_subcommand(1);
    std::function<int()> action;

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "evaluate predictions against ground truth");
    eval->add_option("manifest", eval_args.manifest, "dataset manifest CSV")->required();
    add_match_flags(eval, eval_args);
    eval->add_option("--group-by", eval_args.group_by, "report rows per group")
        ->check(CLI::IsMember({"none", "day", "density"}))
        ->capture_default_str();
    eval->callback([&] { action = [&] { return run_eval(eval_args, out); }; });

    EvalArgs report_args;
    auto* report = app.add_subcommand("report", "density summary table");
    report->add_option("manifest", report_args.manifest, "dataset manifest CSV")->required();
    add_match_flags(report, report_args);
    report->callback([&] { action = [&] { return run_report(report_args, out); }; });

    CountArgs count_args;
    auto* count = app.add_subcommand("count", "count detections and extrapolate to the pond");
    count->add_option("manifest", count_args.manifest, "dataset manifest CSV")->required();
    count->add_option("--conf-thr", count_args.conf_thr, "minimum confidence (inclusive)")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    count->add_option("--volume-factor", count_args.volume_factor, "pond / sampled volume")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    count->add_option("--out-dir", count_args.out_dir, "directory for output files")
        ->capture_default_str();
    count->callback([&] { action = [&] { return run_count(count_args, out); }; });

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit and rank growth models");
    fit->add_option("csv", fit_args.csv, "CSV with age_days,length_mm")->required();
    fit->add_option("--models", fit_args.models, "'all' or a comma list")
        ->check(kModelList)
        ->capture_default_str();
    fit->add_flag("--multi-start", fit_args.multi_start, "add five jittered starts per model");
    fit->add_option("--svg", fit_args.svg, "SVG plot file (relative to --out-dir)");
    fit->add_option("--out-dir", fit_args.out_dir, "directory for output files")->capture_default_str();
    fit->callback([&] { action = [&] { return run_fit(fit_args, out); }; });

    PreprocessArgs pre_args;
    auto* pre = app.add_subcommand("preprocess", "image and annotation transforms");
    pre->require_subcommand(1);
    auto add_inputs = [&](CLI::App* cmd) {
        auto* m = cmd->add_option("--manifest", pre_args.manifest, "dataset manifest CSV");
        auto* img = cmd->add_option("--image", pre_args.image, "single P5/P6 raster");
        cmd->add_option("--labels", pre_args.labels, "ground-truth label file")->excludes(m);
        cmd->add_option("--preds", pre_args.preds, "prediction label file")->excludes(m);
        img->excludes(m);
        cmd->add_option("--out-dir", pre_args.out_dir, "directory for output files")
            ->capture_default_str();
        cmd->callback([&, cmd] {
            pre_args.action = cmd->get_name();
            if (pre_args.manifest.empty() && pre_args.image.empty() && pre_args.labels.empty()) {
                throw CLI::ValidationError("inputs", "one of --manifest, --image or --labels is required");
            }
            action = [&] { return run_preprocess(pre_args, out); };
        });
    };
    auto* crop = pre->add_subcommand("crop", "center crop with annotation rescale");
    crop->add_option("--width", pre_args.width)->required()->check(CLI::PositiveNumber);
    crop->add_option("--height", pre_args.height)->required()->check(CLI::PositiveNumber);
    add_inputs(crop);
    auto* mask = pre->add_subcommand("mask", "blacken pixels outside a circle");
    mask->add_option("--cx", pre_args.cx)->required();
    mask->add_option("--cy", pre_args.cy)->required();
    mask->add_option("--radius", pre_args.radius)->required()->check(CLI::PositiveNumber);
    add_inputs(mask);
    auto* noise = pre->add_subcommand("noise", "zero-mean Gaussian noise per sample");
    noise->add_option("--variance", pre_args.variance)->required()->check(CLI::NonNegativeNumber);
    noise->add_option("--seed", pre_args.seed)->required();
    add_inputs(noise);
    auto* rotate = pre->add_subcommand("rotate", "counter-clockwise quarter turn");
    add_inputs(rotate);
    auto* enlarge = pre->add_subcommand("enlarge", "enlarge small ground-truth boxes");
    auto* thr = enlarge->add_option("--threshold-area", pre_args.threshold_area,
                                    "absolute normalized area threshold")
                    ->check(kOpenUnit);
    enlarge->add_option("--quantile", pre_args.quantile, "threshold as an area quantile (default 0.25)")
        ->check(kOpenUnit)
        ->excludes(thr);
    enlarge->add_option("--mode", pre_args.mode, "literal or normalize")
        ->check(CLI::IsMember({"literal", "normalize"}))
        ->capture_default_str();
    add_inputs(enlarge);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsageError;
    }

    try {
        return action ? action() : kUsageError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDomainError;
    }
}

}  // namespace larvacount::cli
