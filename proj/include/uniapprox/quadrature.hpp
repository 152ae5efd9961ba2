#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "uniapprox/errors.hpp"

namespace uniapprox {

// Adaptive Gauss–Kronrod (G7,K15) integration with optional interior
// breakpoints for kinked integrands.  Bisects until the K15−G7 estimate
// meets the per-interval share of the absolute tolerance.
namespace detail {

// Kronrod-15 abscissae/weights on [-1,1] (positive half) and embedded Gauss-7 weights.
inline constexpr double kXgk[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728};
inline constexpr double kWg[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469};

struct GkEstimate {
    double kronrod;
    double err;
};

template <typename F>
GkEstimate gk15(const F& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double resg = 0.0, resk = 0.0;
    for (int j = 0; j < 8; ++j) {
        const double dx = h * kXgk[j];
        const double fsum = (j == 7) ? f(c) : f(c - dx) + f(c + dx);
        resk += kWgk[j] * fsum;
        if (j % 2 == 1) resg += kWg[j / 2] * fsum;  // odd j: the embedded G7 nodes
    }
    return {resk * h, std::abs(resk - resg) * h};
}

}  // namespace detail

struct QuadratureOptions {
    double abs_tol = 1e-10;
    int max_intervals = 200000;
};

// ∫_a^b f, splitting first at the supplied breakpoints.
template <typename F>
double integrate(const F& f, double a, double b,
                 const std::vector<double>& breakpoints = {},
                 QuadratureOptions opt = {}) {
    if (a == b) return 0.0;
    double sign = 1.0;
    if (a > b) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::vector<double> cuts{a};
    for (double t : breakpoints)
        if (t > a && t < b) cuts.push_back(t);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    struct Seg {
        double a, b, tol;
    };
    std::vector<Seg> stack;
    const double seg_tol = opt.abs_tol / static_cast<double>(cuts.size() - 1);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        stack.push_back({cuts[i], cuts[i + 1], seg_tol});

    double total = 0.0;
    int used = 0;
    while (!stack.empty()) {
        const Seg s = stack.back();
        stack.pop_back();
        if (++used > opt.max_intervals)
            throw QuadratureFailure("integrate: interval budget exhausted");
        const auto est = detail::gk15(f, s.a, s.b);
        if (est.err <= s.tol || (s.b - s.a) < 1e-14 * (1.0 + std::abs(s.a))) {
            total += est.kronrod;
        } else {
            const double m = 0.5 * (s.a + s.b);
            stack.push_back({s.a, m, 0.5 * s.tol});
            stack.push_back({m, s.b, 0.5 * s.tol});
        }
    }
    return sign * total;
}

}  // namespace uniapprox
