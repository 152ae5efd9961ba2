#include "uniapprox/profile.hpp"

#include <algorithm>
#include <cmath>

#include "uniapprox/errors.hpp"

namespace uniapprox {

namespace {

// ∫ |g| u^2 over a piecewise-linear g with compact support: integrate each
// linear piece, splitting at interior sign changes.
double abs_second_moment(const PwLinear& g) {
    const auto& xs = g.knots_x();
    const auto& ys = g.knots_y();
    auto piece = [](double x1, double y1, double x2, double y2) {
        // |y| is linear on the piece once the sign is fixed
        const double beta = (y2 - y1) / (x2 - x1);
        const double alpha = y1 - beta * x1;
        const double s = (y1 + y2 >= 0.0) ? 1.0 : -1.0;
        const double i3 = (x2 * x2 * x2 - x1 * x1 * x1) / 3.0;
        const double i4 = (x2 * x2 * x2 * x2 - x1 * x1 * x1 * x1) / 4.0;
        return s * (alpha * i3 + beta * i4);
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double x1 = xs[i], x2 = xs[i + 1];
        const double y1 = ys[i], y2 = ys[i + 1];
        if (x2 <= x1) continue;
        if (y1 * y2 < 0.0) {
            const double xr = x1 + (x2 - x1) * y1 / (y1 - y2);
            total += piece(x1, y1, xr, 0.0) + piece(xr, 0.0, x2, y2);
        } else {
            total += piece(x1, y1, x2, y2);
        }
    }
    return total;
}

}  // namespace

RidgeProfile make_profile(const PwLinear& g) {
    if (!g.compact_support())
        throw DegenerateActivation("make_profile: profile must vanish outside a compact interval");
    RidgeProfile p;
    p.g = g;
    p.support_radius = std::max(std::abs(g.support_lo()), std::abs(g.support_hi()));
    p.lipschitz = g.max_abs_slope();
    p.m0 = g.integral();
    p.m2 = g.moment2();
    p.sup = g.sup_abs();
    p.m2abs = abs_second_moment(g);
    return p;
}

RidgeProfile standard_profile() {
    return make_profile(PwLinear::hat(1.0) - PwLinear::hat(2.0) * 0.5);
}

RidgeProfile hat_profile(double s) {
    return make_profile(PwLinear::hat(s));
}

}  // namespace uniapprox
