// Copyright (C) 2026 The larvacount Authors
// SPDX-License-Identifier: Apache-2.0

// Least-squares fitting of the growth families: closed-form OLS for the
// linear model, damped Gauss-Newton (Levenberg-Marquardt with Marquardt
// diagonal scaling) for the rest.

#include "larvacount/growth.hpp"

#include "larvacount/kernels.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace larvacount::growth {
namespace {

constexpr double kMaxDamping = 1e16;

// No throwing; non-finite values are left for the caller to reject.
double evaluate(GrowthModel model, std::span<const double> p, double t) noexcept {
    switch (model) {
    case GrowthModel::Vbgm: return p[0] * (1.0 - std::exp(-p[1] * (t - p[2])));
    case GrowthModel::Gompertz: return p[0] * std::exp(-p[1] * std::exp(-p[2] * (t - p[3])));
    case GrowthModel::Linear: return p[0] * t + p[1];
    case GrowthModel::Power: return p[0] * std::pow(t, p[1]);
    case GrowthModel::Exponential: return p[0] * std::exp(p[1] * t);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

bool feasible(GrowthModel model, std::span<const double> p) noexcept {
    if (!std::all_of(p.begin(), p.end(), [](double v) { return std::isfinite(v); })) {
        return false;
    }
    switch (model) {
    case GrowthModel::Vbgm: return p[0] > 0.0 && p[1] > 0.0;
    case GrowthModel::Gompertz: return p[0] > 0.0 && p[2] > 0.0;
    default: return true;
    }
}

void project(GrowthModel model, std::span<double> p) noexcept {
    if (model == GrowthModel::Gompertz) {
        p[3] = std::clamp(p[3], -kGompertzOffsetBound, kGompertzOffsetBound);
    }
}

struct Problem {
    GrowthModel model;
    std::vector<double> ages;
    std::vector<double> lengths;

    // SSE at theta, +inf when any prediction is non-finite.
    double sse(std::span<const double> theta, std::vector<double>& predictions) const {
        predictions.resize(ages.size());
        for (std::size_t i = 0; i < ages.size(); ++i) {
            predictions[i] = evaluate(model, theta, ages[i]);
            if (!std::isfinite(predictions[i])) {
                return std::numeric_limits<double>::infinity();
            }
        }
        return kernels::sum_squared_diff(lengths, predictions);
    }
};

struct Refined {
    std::vector<double> theta;
    double sse = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

Refined refine(const Problem& problem, std::vector<double> theta, const FitOptions& options) {
    const std::size_t n = problem.ages.size();
    const std::size_t p = theta.size();
    project(problem.model, theta);

    std::vector<double> predictions;
    Refined out;
    double sse = problem.sse(theta, predictions);
    out.trace.push_back(sse);
    double damping = options.initial_damping;

    while (out.iterations < options.max_iterations) {
        if (sse == 0.0) {
            out.converged = true;
            break;
        }
        const auto jac = forward_jacobian(problem.model, theta, problem.ages);
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> J(
            jac.data(), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        Eigen::VectorXd residual(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            residual[static_cast<Eigen::Index>(i)] = predictions[i] - problem.lengths[i];
        }
        const Eigen::MatrixXd normal = J.transpose() * J;
        const Eigen::VectorXd gradient = J.transpose() * residual;
        const double diag_floor = std::max(normal.diagonal().maxCoeff(), 1.0) * 1e-12;

        bool accepted = false;
        std::vector<double> trial(p);
        std::vector<double> trial_predictions;
        while (damping <= kMaxDamping) {
            Eigen::MatrixXd system = normal;
            for (Eigen::Index j = 0; j < system.rows(); ++j) {
                system(j, j) += damping * std::max(normal(j, j), diag_floor);
            }
            const Eigen::VectorXd step = system.ldlt().solve(-gradient);
            for (std::size_t j = 0; j < p; ++j) {
                trial[j] = theta[j] + step[static_cast<Eigen::Index>(j)];
            }
            project(problem.model, trial);
            const double trial_sse = feasible(problem.model, trial)
                                         ? problem.sse(trial, trial_predictions)
                                         : std::numeric_limits<double>::infinity();
            if (trial_sse < sse) {
                const double relative_change = (sse - trial_sse) / sse;
                theta = trial;
                predictions = trial_predictions;
                sse = trial_sse;
                damping = std::max(damping / 10.0, 1e-15);
                ++out.iterations;
                out.trace.push_back(sse);
                accepted = true;
                if (relative_change < options.relative_tolerance) {
                    out.converged = true;
                }
                break;
            }
            damping *= 10.0;
        }
        if (!accepted) {
            // no descent step at any damping: stationary to working precision
            out.converged = true;
            break;
        }
        if (out.converged) {
            break;
        }
    }
    out.theta = std::move(theta);
    out.sse = sse;
    return out;
}

// Least squares line y = slope x + intercept.
std::pair<double, double> ols(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) {
        throw Error(ErrorCode::SingularNormalEquations, "all ages are identical");
    }
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

std::vector<double> initial_guess(const Problem& problem) {
    const auto& t = problem.ages;
    const auto& L = problem.lengths;
    const double l_max = *std::max_element(L.begin(), L.end());
    const auto youngest = std::min_element(t.begin(), t.end()) - t.begin();
    const double l_first = L[static_cast<std::size_t>(youngest)];

    switch (problem.model) {
    case GrowthModel::Vbgm: return {1.1 * l_max, 0.1, 0.0};
    case GrowthModel::Gompertz: {
        const double l_inf = 1.1 * l_max;
        const double k2 = std::log(l_inf / l_first);
        return {l_inf, k2 > 0.0 ? k2 : 1.0, 0.1, 0.0};
    }
    case GrowthModel::Linear: {
        auto [slope, intercept] = ols(t, L);
        return {slope, intercept};
    }
    case GrowthModel::Power: {
        // ln L = ln a + b ln t, t = 0 excluded
        std::vector<double> lx;
        std::vector<double> ly;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] > 0.0) {
                lx.push_back(std::log(t[i]));
                ly.push_back(std::log(L[i]));
            }
        }
        if (std::set<double>(lx.begin(), lx.end()).size() < 2) {
            return {l_max, 0.5};
        }
        auto [b, log_a] = ols(lx, ly);
        return {std::exp(log_a), b};
    }
    case GrowthModel::Exponential: {
        std::vector<double> ly(L.size());
        std::transform(L.begin(), L.end(), ly.begin(), [](double v) { return std::log(v); });
        auto [b, log_a] = ols(t, ly);
        return {std::exp(log_a), b};
    }
    }
    return {};
}

}  // namespace

std::vector<double> forward_jacobian(GrowthModel model, std::span<const double> theta,
                                     std::span<const double> ages) {
    const std::size_t p = theta.size();
    std::vector<double> jac(ages.size() * p);
    std::vector<double> shifted(theta.begin(), theta.end());
    for (std::size_t j = 0; j < p; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(theta[j]));
        shifted[j] = theta[j] + h;
        const double actual_h = shifted[j] - theta[j];
        for (std::size_t i = 0; i < ages.size(); ++i) {
            jac[i * p + j] =
                (evaluate(model, shifted, ages[i]) - evaluate(model, theta, ages[i])) / actual_h;
        }
        shifted[j] = theta[j];
    }
    return jac;
}

FitResult fit(GrowthModel model, std::span<const GrowthObservation> observations,
              const FitOptions& options) {
    validate(observations);
    const std::size_t p = parameter_count(model);
    if (observations.size() < p + 1) {
        throw Error(ErrorCode::InsufficientData,
                    std::string(to_string(model)) + " needs at least " + std::to_string(p + 1) +
                        " observations, got " + std::to_string(observations.size()));
    }
    Problem problem{model, {}, {}};
    for (const auto& o : observations) {
        problem.ages.push_back(o.age_days);
        problem.lengths.push_back(o.length_mm);
    }
    if (std::set<double>(problem.ages.begin(), problem.ages.end()).size() < 2) {
        throw Error(ErrorCode::SingularNormalEquations,
                    std::string(to_string(model)) + " needs at least two distinct ages");
    }

    FitResult result;
    result.kind = model;
    std::vector<double> predictions;

    if (model == GrowthModel::Linear) {
        const auto theta = initial_guess(problem);
        result.sse = problem.sse(theta, predictions);
        result.params = from_vector(model, theta);
        result.converged = true;
        result.sse_trace = {result.sse};
    } else {
        const auto start = initial_guess(problem);
        Refined best = refine(problem, start, options);
        if (options.multi_start) {
            std::mt19937_64 rng(0x6a09e667f3bcc909ULL);
            std::uniform_real_distribution<double> jitter(-0.5, 0.5);
            for (int k = 0; k < 5; ++k) {
                auto theta = start;
                for (double& v : theta) {
                    v = v == 0.0 ? jitter(rng) : v * (1.0 + jitter(rng));
                }
                if (!feasible(model, theta)) {
                    continue;
                }
                Refined candidate = refine(problem, theta, options);
                if (candidate.sse < best.sse) {
                    best = std::move(candidate);
                }
            }
        }
        if (!std::isfinite(best.sse)) {
            throw Error(ErrorCode::NonFiniteResult,
                        std::string(to_string(model)) + " has no finite starting point");
        }
        result.params = from_vector(model, best.theta);
        result.sse = best.sse;
        result.iterations = best.iterations;
        result.converged = best.converged;
        result.sse_trace = std::move(best.trace);
        problem.sse(best.theta, predictions);
    }
    result.r_squared = r_squared(observations, predictions);
    return result;
}

}  // namespace larvacount::growth
