// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

#include "larvacount/plot.hpp"

#include "larvacount/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace larvacount::plot {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 480;
constexpr double kLeft = 60;
constexpr double kRight = 170;
constexpr double kTop = 30;
constexpr double kBottom = 50;
constexpr int kCurveSamples = 120;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string growth_svg(std::span<const growth::GrowthObservation> observations,
                       std::span<const growth::RankedFit> fits) {
    double t_max = 1.0;
    double l_max = 1.0;
    for (const auto& o : observations) {
        t_max = std::max(t_max, o.age_days);
        l_max = std::max(l_max, o.length_mm);
    }
    l_max = std::ceil(l_max * 1.15);
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto sx = [&](double t) { return kLeft + t / t_max * plot_w; };
    auto sy = [&](double l) { return kTop + plot_h - std::clamp(l, 0.0, l_max) / l_max * plot_h; };

    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) +
                      "\" height=\"" + num(kHeight) + "\" viewBox=\"0 0 " + num(kWidth) + ' ' +
                      num(kHeight) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\" fill=\"white\"/>\n";
    svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + plot_h) + "\" x2=\"" +
           num(kLeft + plot_w) + "\" y2=\"" + num(kTop + plot_h) + "\"/>\n";
    svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) +
           "\" y2=\"" + num(kTop + plot_h) + "\"/>\n</g>\n";
    svg += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int k = 0; k <= 4; ++k) {
        const double t = t_max * k / 4;
        const double l = l_max * k / 4;
        svg += "<text x=\"" + num(sx(t)) + "\" y=\"" + num(kTop + plot_h + 16) +
               "\" text-anchor=\"middle\">" + num(t) + "</text>\n";
        svg += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy(l) + 4) +
               "\" text-anchor=\"end\">" + num(l) + "</text>\n";
    }
    svg += "<text x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(kHeight - 12) +
           "\" text-anchor=\"middle\">age (days)</text>\n";
    svg += "<text x=\"16\" y=\"" + num(kTop + plot_h / 2) + "\" transform=\"rotate(-90 16 " +
           num(kTop + plot_h / 2) + ")\" text-anchor=\"middle\">length (mm)</text>\n</g>\n";

    std::size_t colour = 0;
    for (const auto& fit : fits) {
        if (!fit.result) {
            continue;
        }
        const char* stroke = kPalette[colour % std::size(kPalette)];
        std::string d;
        for (int s = 0; s <= kCurveSamples; ++s) {
            const double t = t_max * s / kCurveSamples;
            double l = 0.0;
            try {
                l = growth::predict(fit.result->params, t);
            } catch (const Error&) {
                continue;
            }
            d += (d.empty() ? "M" : " L") + num(sx(t)) + ',' + num(sy(l));
        }
        const std::string name(growth::to_string(fit.kind));
        svg += "<path class=\"fit\" data-model=\"" + name + "\" d=\"" + d + "\" fill=\"none\" stroke=\"" +
               stroke + "\" stroke-width=\"1.5\"/>\n";
        const double ly = kTop + 14 + 18 * static_cast<double>(colour);
        svg += "<rect x=\"" + num(kWidth - kRight + 12) + "\" y=\"" + num(ly - 8) +
               "\" width=\"14\" height=\"4\" fill=\"" + stroke + "\"/>\n";
        svg += "<text x=\"" + num(kWidth - kRight + 32) + "\" y=\"" + num(ly) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + name +
               " R\xC2\xB2=" + io::format_fixed(fit.result->r_squared, 3) + "</text>\n";
        ++colour;
    }
    for (const auto& o : observations) {
        svg += "<circle class=\"observation\" cx=\"" + num(sx(o.age_days)) + "\" cy=\"" +
               num(sy(o.length_mm)) + "\" r=\"3\" fill=\"black\"/>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace larvacount::plot
