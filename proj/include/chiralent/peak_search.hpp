// peak_search.hpp - coarse scan + golden-section refinement of a 1-D maximum

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "chiralent/errors.hpp"

namespace chiralent {

struct PeakResult {
    double c_max = 0.0;
    double t_star = 0.0;
};

// 0, then `n - 1` points mixing a logarithmic ladder (dense at early times)
// with a uniform grid, sorted and deduplicated. The log part starts four
// decades below `horizon`.
inline std::vector<double> log_dense_grid(double horizon, std::size_t n) {
    std::vector<double> t;
    if (n < 4 || !(horizon > 0.0)) {
        t.push_back(0.0);
        if (horizon > 0.0)
            t.push_back(horizon);
        return t;
    }
    const std::size_t n_log = (n - 1) / 2;
    const std::size_t n_lin = n - 1 - n_log;
    t.reserve(n);
    t.push_back(0.0);
    for (std::size_t i = 0; i < n_log; ++i) {
        const double e = -4.0 + 4.0 * static_cast<double>(i) / static_cast<double>(n_log - 1);
        t.push_back(horizon * std::pow(10.0, e));
    }
    for (std::size_t i = 1; i <= n_lin; ++i)
        t.push_back(horizon * static_cast<double>(i) / static_cast<double>(n_lin));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
}

// Refines the maximum of `f` given samples `values` of it on `times`.
// The best sample's neighbours bracket a golden-section search; a maximum
// sitting on the last sample is returned as is (the function is still rising
// at the horizon).
template <class F>
PeakResult refine_peak(F&& f, std::span<const double> times, std::span<const double> values,
                       double t_tol = 1e-10) {
    if (times.empty() || times.size() != values.size())
        throw PreconditionError("refine_peak: times and values must be non-empty and equally sized");
    for (double v : values)
        if (!std::isfinite(v))
            throw NumericalError("refine_peak: non-finite value in coarse trace");

    const auto best = static_cast<std::size_t>(
        std::max_element(values.begin(), values.end()) - values.begin());
    PeakResult out{values[best], times[best]};
    if (best == 0 || best + 1 == times.size() || values[best] == 0.0)
        return out;

    constexpr double inv_phi = 0.6180339887498948482;
    double a = times[best - 1];
    double b = times[best + 1];
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    const double tol = t_tol * std::max(1.0, std::abs(times[best]));
    for (int it = 0; it < 200 && (b - a) > tol; ++it) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    if (!std::isfinite(f1) || !std::isfinite(f2))
        throw NumericalError("refine_peak: non-finite value during refinement");
    const double tm = f1 >= f2 ? x1 : x2;
    const double fm = std::max(f1, f2);
    if (fm > out.c_max)
        out = {fm, tm};
    return out;
}

} // namespace chiralent
