#pragma once

// Multi-start projected ascent for positively 0-homogeneous objectives
// (ratios of norms), which makes the search space the unit sphere.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "ehrlab/random.hpp"

namespace ehrlab {

struct OptimizerSettings {
    std::size_t starts = 64;           // random multi-starts
    std::size_t max_iterations = 200;  // per start
    std::size_t polished_axes = 4;     // best axis candidates also used as starts
    std::uint64_t seed = 0;
    double initial_step = 0.25;
    double min_step = 1e-10;

    // Modulus search: delta ranges over the lattice 2^{j / delta_resolution}
    // inside [eps / max_constant, delta_max].
    double delta_max = 1e3;
    double max_constant = 1e6;
    int delta_resolution = 1024;
};

// f(x, grad) returns the objective at x; when grad is nonempty it also writes a
// (sub)gradient there. f must satisfy f(c x) = f(x) for c > 0.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

struct Maximum {
    double value = -std::numeric_limits<double>::infinity();
    std::vector<double> argmax;
    bool approximate = false;
    std::size_t evaluations = 0;
};

namespace detail {

inline bool normalize_l2(std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    s = std::sqrt(s);
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    for (double& v : x) v /= s;
    return true;
}

inline double sanitize(double v) { return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v; }

struct RunResult {
    double value = -std::numeric_limits<double>::infinity();
    std::vector<double> x;
    bool converged = false;
    std::size_t evaluations = 0;
};

inline RunResult ascend(const Objective& f, std::vector<double> x, const OptimizerSettings& opt) {
    RunResult run;
    if (!normalize_l2(x)) return run;
    const std::size_t n = x.size();
    std::vector<double> g(n), gy(n), y(n);
    double fx = sanitize(f(x, g));
    ++run.evaluations;
    double step = opt.initial_step;
    for (std::size_t it = 0; it < opt.max_iterations && std::isfinite(fx); ++it) {
        if (step < opt.min_step) break;
        bool moved = false;
        // Gradient step along the tangent part of g.
        double gx = 0.0;
        for (std::size_t i = 0; i < n; ++i) gx += g[i] * x[i];
        double gn = 0.0;
        for (std::size_t i = 0; i < n; ++i) gn += (g[i] - gx * x[i]) * (g[i] - gx * x[i]);
        gn = std::sqrt(gn);
        if (gn > 0.0 && std::isfinite(gn)) {
            for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + step * (g[i] - gx * x[i]) / gn;
            if (normalize_l2(y)) {
                const double fy = sanitize(f(y, gy));
                ++run.evaluations;
                if (fy > fx) {
                    x.swap(y);
                    g.swap(gy);
                    fx = fy;
                    step = std::min(2.0 * step, 1.0);
                    moved = true;
                }
            }
        }
        // Compass poll; handles kinks where the subgradient zigzags.
        for (std::size_t i = 0; i < n && !moved; ++i) {
            for (double s : {1.0, -1.0}) {
                y = x;
                y[i] += s * step;
                if (!normalize_l2(y)) continue;
                const double fy = sanitize(f(y, {}));
                ++run.evaluations;
                if (fy > fx) {
                    x.swap(y);
                    fx = sanitize(f(x, g));
                    ++run.evaluations;
                    moved = true;
                    break;
                }
            }
        }
        if (!moved) step *= 0.5;
    }
    run.value = fx;
    run.x = std::move(x);
    run.converged = step < opt.min_step || !std::isfinite(fx);
    return run;
}

} // namespace detail

// Maximizes f over directions in R^dim: deterministic scan of the signed
// coordinate axes, then ascent from the warm starts, the best axes and
// `opt.starts` seeded random directions. Ties keep the earliest candidate.
// Stops early once the best value reaches `stop_at` (callers that only need
// to know whether the maximum exceeds a threshold).
inline Maximum maximize_homogeneous(const Objective& f, std::size_t dim, const OptimizerSettings& opt,
                                    std::span<const std::vector<double>> warm = {},
                                    double stop_at = std::numeric_limits<double>::infinity()) {
    Maximum best;
    auto consider = [&](double value, const std::vector<double>& x, bool converged) {
        if (value > best.value || best.argmax.empty()) {
            best.value = value;
            best.argmax = x;
            best.approximate = !converged;
        }
    };

    struct Axis {
        double value;
        std::vector<double> x;
    };
    std::vector<Axis> axes;
    for (std::size_t i = 0; i < dim; ++i) {
        for (double s : {1.0, -1.0}) {
            std::vector<double> e(dim, 0.0);
            e[i] = s;
            const double v = detail::sanitize(f(e, {}));
            ++best.evaluations;
            consider(v, e, true);
            axes.push_back({v, std::move(e)});
        }
    }
    if (best.value >= stop_at) return best;

    std::stable_sort(axes.begin(), axes.end(), [](const Axis& a, const Axis& b) { return a.value > b.value; });

    // warm starts first: in a bisection they are the likeliest to cross stop_at
    std::vector<std::vector<double>> starts;
    for (const auto& w : warm) {
        if (w.size() == dim) starts.push_back(w);
    }
    for (std::size_t i = 0; i < std::min(opt.polished_axes, axes.size()); ++i) starts.push_back(axes[i].x);
    for (std::size_t s = 0; s < opt.starts; ++s) {
        Rng rng(stream_seed(opt.seed, s));
        starts.push_back(rng.gaussian_vector(dim));
    }

    for (const auto& x0 : starts) {
        auto run = detail::ascend(f, x0, opt);
        best.evaluations += run.evaluations;
        if (run.x.empty()) continue;
        consider(run.value, run.x, run.converged);
        if (best.value >= stop_at) break;
    }
    return best;
}

} // namespace ehrlab
