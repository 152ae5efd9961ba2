#include "uniapprox/ridge2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "uniapprox/activation.hpp"
#include "uniapprox/errors.hpp"
#include "uniapprox/parallel.hpp"
#include "uniapprox/quadrature.hpp"

namespace uniapprox {

namespace {
constexpr double kPi = std::numbers::pi_v<double>;
constexpr double kTwoPi = 2.0 * std::numbers::pi_v<double>;
}  // namespace

double target_f(const RidgeProfile& g, double x, double y) {
    const double R = std::hypot(x, y);
    if (R < 1e-14) return kTwoPi * g(0.0);
    // kinks of θ ↦ g(R sinθ) sit where R sinθ crosses a knot
    std::vector<double> breaks{0.5 * kPi, 1.5 * kPi};
    for (double u : g.g.knots_x()) {
        if (std::abs(u) > R) continue;
        const double t = std::asin(u / R);  // in [-π/2, π/2]
        double t1 = t < 0.0 ? t + kTwoPi : t;
        double t2 = kPi - t;
        if (t1 > 0.0 && t1 < kTwoPi) breaks.push_back(t1);
        if (t2 > 0.0 && t2 < kTwoPi) breaks.push_back(t2);
    }
    QuadratureOptions opt;
    opt.abs_tol = 1e-10;
    return integrate([&](double th) { return g(R * std::sin(th)); }, 0.0,
                     kTwoPi, breaks, opt);
}

double target_f_radial(const RidgeProfile& g, double R) {
    if (R < 1e-14) return kTwoPi * g(0.0);
    const auto& xs = g.g.knots_x();
    const auto& ys = g.g.knots_y();
    const double b = std::min(R, g.support_radius);
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        double u1 = std::max(xs[i], -b);
        double u2 = std::min(xs[i + 1], b);
        if (u2 <= u1) continue;
        const double beta = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        const double alpha = ys[i] - beta * xs[i];
        const double a1 = std::asin(std::clamp(u1 / R, -1.0, 1.0));
        const double a2 = std::asin(std::clamp(u2 / R, -1.0, 1.0));
        const double s1 = std::sqrt(std::max(0.0, (R - u1) * (R + u1)));
        const double s2 = std::sqrt(std::max(0.0, (R - u2) * (R + u2)));
        // s2 − s1 loses all absolute accuracy for R ≫ a; the product form
        // (u1²−u2²)/(s1+s2) keeps the per-piece error at machine scale
        const double ds =
            s1 + s2 > 0.0 ? (u1 - u2) * (u1 + u2) / (s1 + s2) : 0.0;
        total += alpha * (a2 - a1) - beta * ds;
    }
    return 2.0 * total;
}

Network riemann_net(const RidgeProfile& g, int N) {
    if (N < 1) throw ConfigError("riemann_net: N must be positive");
    const Activation act = Activation::from_pwlinear("profile", g.g);
    std::vector<Unit> units;
    std::vector<double> coeffs;
    units.reserve(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        const double th = kTwoPi * k / N;
        units.push_back(Unit{{std::cos(th), std::sin(th)}, 0.0});
        coeffs.push_back(kTwoPi / N);
    }
    return Network::one_layer(2, std::move(units), act, std::move(coeffs), 0.0);
}

int support_hits(const RidgeProfile& g, int N, double x, double y) {
    if (N < 1) throw ConfigError("support_hits: N must be positive");
    int hits = 0;
    for (int k = 0; k < N; ++k) {
        const double th = kTwoPi * k / N;
        const double s = std::cos(th) * x + std::sin(th) * y;
        if (std::abs(s) <= g.support_radius) ++hits;
    }
    return hits;
}

double phi_two_radius(double a, int M) {
    const double ang = kTwoPi / std::ldexp(1.0, M);
    return a * std::sqrt(2.0 / (1.0 - std::cos(ang)));
}

double decay_exponent(
    const std::vector<std::pair<double, double>>& point_values) {
    if (point_values.size() < 4)
        throw DegenerateData("decay_exponent: need at least 4 radii");
    double rmin = point_values.front().first, rmax = rmin;
    for (const auto& [R, v] : point_values) {
        if (!(R > 0.0)) throw DegenerateData("decay_exponent: radii must be positive");
        if (!(v > 1e-300)) throw DegenerateData("decay_exponent: value underflow");
        rmin = std::min(rmin, R);
        rmax = std::max(rmax, R);
    }
    if (std::log10(rmax / rmin) < 2.0 - 1e-9)
        throw DegenerateData("decay_exponent: radii must span two decades");
    std::vector<std::pair<double, double>> logs;
    logs.reserve(point_values.size());
    for (const auto& [R, v] : point_values)
        logs.emplace_back(std::log(R), std::log(v));
    return slope_fit(logs).slope;
}

TailDescription f_tail(const RidgeProfile& g, double r0) {
    const double a = g.support_radius;
    if (!(r0 > a))
        throw InvalidTail("f_tail: inner radius must exceed the support radius");
    const double q = (a / r0) * (a / r0);
    TailDescription t;
    t.inner_radius = r0;
    if (std::abs(g.m0) <= 1e-10) {
        // |f(R)| ≤ (m2abs/R³)(1 + 2q/(1−q)) from the (1−u²/R²)^{-1/2} series
        const double K = g.m2abs * (1.0 + 2.0 * q / (1.0 - q));
        t.exponent = 3.0;
        t.C = 2.0 * K * (1.0 + 1.0 / (r0 * r0 * r0));
    } else {
        const double K =
            2.0 * (std::abs(g.m0) + g.m2abs / (a * a) * q / (1.0 - q));
        t.exponent = 1.0;
        t.C = 2.0 * K * (1.0 + 1.0 / r0);
    }
    return t;
}

double psi(const RidgeProfile& g, double x) {
    if (std::abs(g.m0) > 1e-10)
        throw ProfileNotZeroMean("psi: profile must have zero mean");
    const double a = g.support_radius;
    const TailDescription tail = f_tail(g, 2.0 * a);
    // cut the y-integral where the remaining mass ∫ C/R³ is provably small:
    // half-line error = 2·(quad tol 2.5e-9 + cut 1.25e-9) ≤ 1e-8 total
    const double Y = std::max(4.0 * a + std::abs(x),
                              std::sqrt(tail.C / (2.0 * 1.25e-9)));
    std::vector<double> breaks;
    for (double u : g.g.knots_x()) {
        const double k2 = u * u - x * x;
        if (k2 > 0.0) breaks.push_back(std::sqrt(k2));
    }
    breaks.push_back(std::min(Y, std::max(1.0, std::abs(x))));
    QuadratureOptions opt;
    opt.abs_tol = 2.5e-9;
    opt.max_intervals = 400000;
    const double half = integrate(
        [&](double y) { return target_f_radial(g, std::hypot(x, y)); }, 0.0, Y,
        breaks, opt);
    return 2.0 * half;
}

namespace {

// range of cos over an angle interval [lo, hi]
inline void cos_range(double lo, double hi, double& cmin, double& cmax) {
    if (hi - lo >= kTwoPi) {
        cmin = -1.0;
        cmax = 1.0;
        return;
    }
    const double cl = std::cos(lo), ch = std::cos(hi);
    cmin = std::min(cl, ch);
    cmax = std::max(cl, ch);
    // does [lo, hi] contain a multiple of 2π (max) or an odd multiple of π?
    const double k_up = std::ceil(lo / kTwoPi);
    if (k_up * kTwoPi <= hi) cmax = 1.0;
    const double k_pi = std::ceil((lo - kPi) / kTwoPi);
    if (kPi + k_pi * kTwoPi <= hi) cmin = -1.0;
}

// s = r·cos(φ) over r ∈ [r1, r2] ≥ 0, cosφ ∈ [cmin, cmax]
inline void dot_range(double r1, double r2, double cmin, double cmax,
                      double& slo, double& shi) {
    shi = cmax >= 0.0 ? r2 * cmax : r1 * cmax;
    slo = cmin <= 0.0 ? r2 * cmin : r1 * cmin;
}

}  // namespace

SupNormCertificate riemann_convergence_error(const RidgeProfile& g, int m,
                                             const ConvergenceOptions& opt) {
    if (m < 2 || m > 16)
        throw ConfigError("riemann_convergence_error: m out of range");
    const int N = 1 << m;
    const double a = g.support_radius;
    const double c = g.lipschitz;
    const double ginf = g.sup;
    const double wedge = kPi / N;  // dihedral fundamental domain [0, π/N]

    // far radius: strip-count bound (2N/π)asin(a/r)+2 reaches 3 here
    const double rfar = a / std::sin(kPi / (2.0 * N));
    const TailDescription ftail = f_tail(g, std::min(2.0 * a, 0.8 * rfar));
    const double tail_bound =
        3.0 * (kTwoPi / N) * ginf + ftail.bound_at(rfar);

    // per-cell width budget: a fraction of the gap between the two-strip
    // floor 2·(2π/N)·ginf and the three-strip tail
    const double budget = opt.slack_budget * (kTwoPi / N) * ginf;

    auto fprime = [&](double r) {
        return 4.0 * c * std::min(1.0, (a * a) / std::max(r * r, 1e-12));
    };
    auto phi_bound = [&](double r) {
        if (r <= a) return double(N);
        return std::min(double(N),
                        (2.0 * N / kPi) * std::asin(a / r) + 2.0);
    };

    const double r_in = 1.5 * a;

    // ---- inner wedge: pointwise scan with Lipschitz slack ----
    // |∇f_N| ≤ (2π/N)·c·Φ ≤ 2πc, |∇f| ≤ 4c
    const double L_in = kTwoPi * c + 4.0 * c;
    const double cover = 0.8 * budget / L_in;           // covering radius
    const double hr = std::max(cover * std::sqrt(2.0), 1e-4);
    const std::size_t n_ring = static_cast<std::size_t>(std::ceil(r_in / hr));
    std::vector<double> dirs_x(static_cast<std::size_t>(N)),
        dirs_y(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        dirs_x[static_cast<std::size_t>(k)] = std::cos(kTwoPi * k / N);
        dirs_y[static_cast<std::size_t>(k)] = std::sin(kTwoPi * k / N);
    }
    const double inner_max = parallel_max(
        n_ring,
        [&](std::size_t i) {
            const double r = (double(i) + 0.5) * hr;
            // arc length at the ring's outer edge decides the column count
            const int ncol =
                std::max(1, int(std::ceil(wedge * (r + 0.5 * hr) / hr)));
            double mrow = 0.0;
            for (int j = 0; j < ncol; ++j) {
                const double th = wedge * (double(j) + 0.5) / ncol;
                const double x = r * std::cos(th), y = r * std::sin(th);
                double fn = 0.0;
                for (int k = 0; k < N; ++k)
                    fn += g(dirs_x[static_cast<std::size_t>(k)] * x +
                            dirs_y[static_cast<std::size_t>(k)] * y);
                fn *= kTwoPi / N;
                mrow = std::max(mrow,
                                std::abs(fn - target_f_radial(g, r)));
            }
            return mrow;
        },
        opt.threads);
    // ---- strip annulus: interval cells over [r_in, rfar] ----
    // Cell bounds are interval-rigorous; no Lipschitz slack is added.
    double annulus_bound = 0.0;
    double r1 = r_in;
    while (r1 < rfar) {
        const double phi_here = phi_bound(r1);
        const double dr_strip =
            budget * N / (8.0 * kPi * std::max(c, 1e-12) * phi_here);
        const double dr_f = 0.5 * budget / std::max(fprime(r1), 1e-12);
        const double dr = std::max(opt.min_dr,
                                   std::min({dr_strip, dr_f, 0.05 * r1 + 0.1}));
        const double r2 = std::min(rfar, r1 + dr);
        const int ncol = std::max(1, int(std::ceil(wedge * r2 / dr)));
        const double dth = wedge / ncol;

        // f over the ring
        const double fmid = target_f_radial(g, 0.5 * (r1 + r2));
        const double fhw = 0.5 * fprime(r1) * (r2 - r1);

        // candidate directions: strips can only touch the cell when θ_k is
        // within asin(a/r1) (+ margins) of the cell angle ± π/2
        const double w = std::asin(std::min(1.0, a / r1)) + dth +
                         2.0 * kTwoPi / N;
        const bool all_dirs = w + dth >= kPi / 2.0;

        for (int j = 0; j < ncol; ++j) {
            const double t1 = j * dth, t2 = (j + 1) * dth;
            const double tm = 0.5 * (t1 + t2);
            double fn_lo = 0.0, fn_hi = 0.0;
            auto add_dir = [&](int k) {
                const int kk = ((k % N) + N) % N;
                const double thk = kTwoPi * kk / N;
                double cmin, cmax;
                cos_range(t1 - thk, t2 - thk, cmin, cmax);
                double slo, shi;
                dot_range(r1, r2, cmin, cmax, slo, shi);
                if (slo > a || shi < -a) return;
                const auto [glo, ghi] = g.g.range_minmax(slo, shi);
                fn_lo += glo;
                fn_hi += ghi;
            };
            if (all_dirs) {
                for (int k = 0; k < N; ++k) add_dir(k);
            } else {
                for (int side = 0; side < 2; ++side) {
                    const double ctr = tm + (side ? 0.5 : -0.5) * kPi;
                    const int k_lo =
                        int(std::floor((ctr - w) * N / kTwoPi)) - 1;
                    const int k_hi =
                        int(std::ceil((ctr + w) * N / kTwoPi)) + 1;
                    for (int k = k_lo; k <= k_hi; ++k) add_dir(k);
                }
            }
            fn_lo *= kTwoPi / N;
            fn_hi *= kTwoPi / N;
            const double lo = fn_lo - (fmid + fhw);
            const double hi = fn_hi - (fmid - fhw);
            annulus_bound =
                std::max(annulus_bound, std::max(std::abs(lo), std::abs(hi)));
        }
        r1 = r2;
    }

    SupNormCertificate cert;
    cert.grid_max = std::max(inner_max, annulus_bound);
    cert.lipschitz_slack = L_in * cover;
    cert.tail_bound = tail_bound;
    cert.total = std::max(cert.grid_max + cert.lipschitz_slack, cert.tail_bound);
    cert.domain_radius = rfar;
    cert.grid_step = hr;
    return cert;
}

}  // namespace uniapprox
