#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "error.hpp"

namespace fractrace {

// Pairwise (cascade) summation. The split points depend only on the length,
// so the result is independent of how callers partition work.
template <class T>
T pairwise_sum(std::span<const T> v) {
    constexpr std::size_t leaf = 32;
    if (v.size() <= leaf) {
        T s{};
        for (const T& x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

template <class T>
T pairwise_sum(const std::vector<T>& v) { return pairwise_sum(std::span<const T>(v)); }

struct LineQuadrature {
    double value = 0.0;
    double rel_change = 0.0; // |I_h - I_{2h}| / |I_h| at the last halving
    std::size_t nodes = 0;
    bool converged = false;
};

// ∫_R f(t) dt for f analytic in a strip, non-negative and decaying in both
// directions from t0. Tails are located by unit steps from t0 until f drops
// below cut·max; then the trapezoid step is halved until successive sums agree
// to rtol. For such integrands the trapezoid error decays exponentially in 1/h.
template <class F>
LineQuadrature integrate_line(F&& f, double t0, double rtol = 1e-10, std::size_t max_nodes = 200000,
                              double cut = 1e-18, double step = 1.0) {
    double fmax = std::abs(f(t0));
    auto walk = [&](double dir) {
        double t = t0;
        int quiet = 0;
        for (int i = 0; i < 100000; ++i) {
            t += dir * step;
            const double v = std::abs(f(t));
            fmax = std::max(fmax, v);
            quiet = (v <= cut * fmax) ? quiet + 1 : 0;
            if (quiet >= 3) return t;
        }
        throw divergence_error("integrate_line: integrand does not decay");
    };
    const double lo = walk(-1.0), hi = walk(1.0);
    LineQuadrature out;
    double h = step;
    std::size_t cells = static_cast<std::size_t>(std::llround((hi - lo) / h));
    std::vector<double> vals;
    vals.reserve(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i) vals.push_back(f(lo + h * i));
    auto trap = [&](const std::vector<double>& v) {
        return h * (pairwise_sum(v) - 0.5 * (v.front() + v.back()));
    };
    double prev = trap(vals);
    out.nodes = vals.size();
    while (true) {
        std::vector<double> next;
        next.reserve(2 * vals.size());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            next.push_back(vals[i]);
            next.push_back(f(lo + h * (i + 0.5)));
        }
        next.push_back(vals.back());
        h *= 0.5;
        vals.swap(next);
        const double cur = trap(vals);
        out.nodes = vals.size();
        out.value = cur;
        out.rel_change = cur != 0.0 ? std::abs(cur - prev) / std::abs(cur) : std::abs(cur - prev);
        if (out.rel_change < rtol && h <= 0.25 * step) {
            out.converged = true;
            return out;
        }
        if (2 * vals.size() > max_nodes) return out;
        prev = cur;
    }
}

} // namespace fractrace
