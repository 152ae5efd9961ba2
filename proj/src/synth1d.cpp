#include "uniapprox/synth1d.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <utility>

#include "uniapprox/errors.hpp"

namespace uniapprox {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double stable_softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double stable_logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

struct KnotJump {
    double x;
    double jump;  // slope change across the knot
};

std::vector<KnotJump> nonzero_slope_jumps(const PwLinear& f) {
    const auto& xs = f.knots_x();
    const auto& ys = f.knots_y();
    const std::size_t n = xs.size();
    std::vector<double> slopes(n + 1);
    slopes[0] = f.left_slope();
    for (std::size_t i = 1; i < n; ++i)
        slopes[i] = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
    slopes[n] = f.right_slope();
    std::vector<KnotJump> out;
    for (std::size_t i = 0; i < n; ++i) {
        const double j = slopes[i + 1] - slopes[i];
        if (j != 0.0) out.push_back({xs[i], j});
    }
    return out;
}

double min_spacing(const std::vector<double>& xs) {
    double s = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < xs.size(); ++i) s = std::min(s, xs[i] - xs[i - 1]);
    return std::isfinite(s) ? s : 1.0;
}

SupNormCertificate exact_certificate(double radius) {
    SupNormCertificate c;
    c.grid_max = 0.0;
    c.lipschitz_slack = 0.0;
    c.tail_bound = 0.0;
    c.total = 0.0;
    c.domain_radius = radius;
    c.grid_step = 0.0;
    return c;
}

// ---------------------------------------------------------------------------
// Exact routes for piecewise-linear activations.

// Single-kink φ (the ReLU family): with kink at t and slopes sL/sR,
//   relu(u) = (φ(t+u) − φ(t) − sL·u) / (sR − sL)
// holds on the whole line, so the knot representation of the target
// transfers verbatim.  Two extra units carry the (here zero) linear part.
Expansion exact_single_kink(const PwLinear& g, const Activation& phi) {
    const PwLinear& p = phi.pw();
    const auto pj = nonzero_slope_jumps(p);
    const double t = pj[0].x;
    const double den = pj[0].jump;  // sR − sL
    const double sl = p.left_slope();
    const double phit = p(t);

    std::vector<Unit> units;
    std::vector<double> coeffs;
    double bias = g.knots_y().front();
    double cx = 0.0;
    for (const auto& kj : nonzero_slope_jumps(g)) {
        units.push_back({{1.0}, t - kj.x});
        coeffs.push_back(kj.jump / den);
        cx += kj.jump * kj.x;
        bias -= kj.jump * phit / den;
    }
    bias += sl / den * cx;
    // slope bookkeeping pair (coefficients vanish for a compact target)
    units.push_back({{1.0}, t});
    coeffs.push_back(0.0);
    units.push_back({{-1.0}, t});
    coeffs.push_back(0.0);

    Expansion e{Network::one_layer(1, std::move(units), phi, std::move(coeffs), bias),
                0.0, exact_certificate(std::abs(g.support_lo()) + std::abs(g.support_hi()))};
    return e;
}

// Bounded-ramp φ (v1 and rescalings): one unit per sloped interval of the
// target; each unit's ramp window is mapped onto that interval, so the sum
// telescopes to the target exactly.
Expansion exact_ramp(const PwLinear& g, const Activation& phi) {
    const PwLinear& p = phi.pw();
    const auto pj = nonzero_slope_jumps(p);
    const double k0 = pj[0].x, k1 = pj[1].x;
    const double y0 = p(k0), y1 = p(k1);
    const double rise = y1 - y0;

    const auto& xs = g.knots_x();
    const auto& ys = g.knots_y();
    std::vector<Unit> units;
    std::vector<double> coeffs;
    double bias = ys.front();
    for (std::size_t i = 1; i < xs.size(); ++i) {
        const double dx = xs[i] - xs[i - 1];
        const double sigma = (ys[i] - ys[i - 1]) / dx;
        if (sigma == 0.0) continue;
        const double w = (k1 - k0) / dx;
        const double c = sigma * dx / rise;
        units.push_back({{w}, k0 - w * xs[i - 1]});
        coeffs.push_back(c);
        bias -= c * y0;
    }
    Expansion e{Network::one_layer(1, std::move(units), phi, std::move(coeffs), bias),
                0.0, exact_certificate(std::abs(g.support_lo()) + std::abs(g.support_hi()))};
    return e;
}

// ---------------------------------------------------------------------------
// Approximate routes: least squares over a kink-centered dictionary of
// translated/dilated copies of a normalized unit shape σ.

// |σ''(u)| ≤ min(d2max, a2·e^{−r2·|u|}), |σ'(u)| ≤ a1·e^{−r1·|u|}, and the
// approach to the limits is bounded by tail_a·e^{−tail_r·dist}.
struct Basis {
    std::function<double(double)> s;
    std::function<double(double)> ds;
    double d2max = 0.0;
    double a2 = 0.0, r2 = 0.0;
    double a1 = 0.0, r1 = 0.0;
    double tail_a = 0.0, tail_r = 0.0;
    bool bump = false;              // both limits zero → no Σc constraint
    std::optional<PwLinear> pl;     // exact algebra available
    std::function<void(double w, double b, double c, std::vector<Unit>&,
                       std::vector<double>&, double&)> lower;
};

Basis basis_for(const Activation& phi) {
    Basis k;
    switch (phi.kind()) {
    case ActKind::Tanh:
        k.s = [](double u) { return 0.5 * (1.0 + std::tanh(u)); };
        k.ds = [](double u) { const double t = std::tanh(u); return 0.5 * (1.0 - t * t); };
        k.d2max = 2.0 / (3.0 * std::sqrt(3.0));
        k.a2 = 4.0; k.r2 = 2.0;
        k.a1 = 2.0; k.r1 = 2.0;
        k.tail_a = 1.0; k.tail_r = 2.0;
        k.lower = [](double w, double b, double c, std::vector<Unit>& us,
                     std::vector<double>& cs, double& bias) {
            us.push_back({{w}, b});
            cs.push_back(0.5 * c);
            bias += 0.5 * c;
        };
        return k;
    case ActKind::Logistic:
        k.s = [](double u) { return stable_logistic(u); };
        k.ds = [](double u) { const double s = stable_logistic(u); return s * (1.0 - s); };
        k.d2max = 1.0 / (6.0 * std::sqrt(3.0));
        k.a2 = 1.0; k.r2 = 1.0;
        k.a1 = 1.0; k.r1 = 1.0;
        k.tail_a = 1.0; k.tail_r = 1.0;
        k.lower = [](double w, double b, double c, std::vector<Unit>& us,
                     std::vector<double>& cs, double& bias) {
            (void)bias;
            us.push_back({{w}, b});
            cs.push_back(c);
        };
        return k;
    case ActKind::Softplus:
        // φ(u) − φ(u−1) is a unit-limit sigmoid; every σ-unit lowers to two
        // φ-units.
        k.s = [](double u) { return stable_softplus(u) - stable_softplus(u - 1.0); };
        k.ds = [](double u) { return stable_logistic(u) - stable_logistic(u - 1.0); };
        k.d2max = 0.25;
        k.a2 = 1.0 + std::numbers::e; k.r2 = 1.0;
        k.a1 = std::numbers::e; k.r1 = 1.0;
        k.tail_a = std::numbers::e; k.tail_r = 1.0;
        k.lower = [](double w, double b, double c, std::vector<Unit>& us,
                     std::vector<double>& cs, double& bias) {
            (void)bias;
            us.push_back({{w}, b});
            cs.push_back(c);
            us.push_back({{w}, b - 1.0});
            cs.push_back(-c);
        };
        return k;
    case ActKind::Gaussian:
        k.s = [](double u) { return std::exp(-u * u); };
        k.ds = [](double u) { return -2.0 * u * std::exp(-u * u); };
        k.d2max = 2.0;
        k.a2 = 3.5; k.r2 = 1.0;
        k.a1 = 2.0; k.r1 = 1.0;
        k.tail_a = std::exp(0.25); k.tail_r = 1.0;
        k.bump = true;
        k.lower = [](double w, double b, double c, std::vector<Unit>& us,
                     std::vector<double>& cs, double& bias) {
            (void)bias;
            us.push_back({{w}, b});
            cs.push_back(c);
        };
        return k;
    case ActKind::PiecewiseLinear: {
        const PwLinear& p = phi.pw();
        const double ls = p.left_slope(), rs = p.right_slope();
        if (ls == 0.0 && rs == 0.0) {
            const double ylo = p.knots_y().front(), yhi = p.knots_y().back();
            if (ylo != yhi) {
                // bounded sigmoid-shaped PL: normalize the limits to 0/1
                auto pl = std::make_shared<PwLinear>(
                    (p + PwLinear::constant(-ylo)) * (1.0 / (yhi - ylo)));
                k.s = [pl](double u) { return (*pl)(u); };
                k.pl = *pl;
                const double scale = 1.0 / (yhi - ylo);
                k.lower = [scale, ylo](double w, double b, double c,
                                       std::vector<Unit>& us,
                                       std::vector<double>& cs, double& bias) {
                    us.push_back({{w}, b});
                    cs.push_back(c * scale);
                    bias -= c * scale * ylo;
                };
            } else {
                // bounded PL bump
                auto pl = std::make_shared<PwLinear>(p + PwLinear::constant(-ylo));
                k.s = [pl](double u) { return (*pl)(u); };
                k.pl = *pl;
                k.bump = true;
                k.lower = [ylo](double w, double b, double c, std::vector<Unit>& us,
                                std::vector<double>& cs, double& bias) {
                    us.push_back({{w}, b});
                    cs.push_back(c);
                    bias -= c * ylo;
                };
            }
            return k;
        }
        // unbounded PL: its second difference at half the kink spacing is a
        // compactly supported bump (kink copies cannot collide)
        const double delta = 0.5 * min_spacing(p.knots_x());
        auto pl = std::make_shared<PwLinear>(
            p - p.shifted(delta) * 2.0 + p.shifted(2.0 * delta));
        if (pl->sup_abs() == 0.0)
            throw DegenerateActivation("activation is affine");
        k.s = [pl](double u) { return (*pl)(u); };
        k.pl = *pl;
        k.bump = true;
        k.lower = [delta](double w, double b, double c, std::vector<Unit>& us,
                          std::vector<double>& cs, double& bias) {
            (void)bias;
            us.push_back({{w}, b});
            cs.push_back(c);
            us.push_back({{w}, b - delta});
            cs.push_back(-2.0 * c);
            us.push_back({{w}, b - 2.0 * delta});
            cs.push_back(c);
        };
        return k;
    }
    default:
        throw UnsupportedActivationClass(
            "no synthesis route for activation '" + phi.name() + "'");
    }
}

struct Column {
    double scale, center;
};

std::vector<Column> build_dictionary(const std::vector<double>& kinks,
                                     double lo, double hi, double s0, int depth) {
    std::vector<Column> cols;
    const double step = 0.6 * s0;
    for (double z = lo - 2.0 * s0; z <= hi + 2.0 * s0 + 1e-12; z += step)
        cols.push_back({s0, z});
    static constexpr double offs[] = {-1.5, -0.75, 0.0, 0.75, 1.5};
    for (int l = 1; l <= depth; ++l) {
        const double sl = s0 / std::ldexp(1.0, l);
        for (double kx : kinks)
            for (double o : offs) cols.push_back({sl, kx + o * sl});
    }
    std::sort(cols.begin(), cols.end(), [](const Column& a, const Column& b) {
        return a.scale != b.scale ? a.scale < b.scale : a.center < b.center;
    });
    cols.erase(std::unique(cols.begin(), cols.end(), [](const Column& a, const Column& b) {
                   return a.scale == b.scale && std::abs(a.center - b.center) < 1e-12;
               }),
               cols.end());
    return cols;
}

std::vector<double> sample_grid(double lo, double hi, double s0, double finest,
                                std::size_t min_count) {
    const double span = hi - lo;
    double step = std::min(s0 / 6.0, 0.5 * finest);
    step = std::max(step, span / 30000.0);
    if (span / step < static_cast<double>(min_count)) step = span / static_cast<double>(min_count);
    std::vector<double> xs;
    for (double x = lo; x <= hi + 0.5 * step; x += step) xs.push_back(x);
    return xs;
}

Eigen::MatrixXd design_matrix(const Basis& bs, const std::vector<Column>& cols,
                              const std::vector<double>& xs) {
    Eigen::MatrixXd A(static_cast<Eigen::Index>(xs.size()),
                      static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const double w = 1.0 / cols[j].scale, b = -cols[j].center / cols[j].scale;
        for (std::size_t i = 0; i < xs.size(); ++i)
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                bs.s(w * xs[i] + b);
    }
    return A;
}

constexpr double kConstraintWeight = 1e6;

// Least squares with optional Lawson sup-norm polishing.  The Σc = 0 row
// (absent for bump bases) keeps its large fixed weight across iterations so
// the fitted model vanishes at both ends of the line.
Eigen::VectorXd solve_lawson(const Eigen::MatrixXd& A, const Eigen::VectorXd& y,
                             bool constrain, int iters) {
    const Eigen::Index m = A.rows(), n = A.cols();
    const Eigen::Index rows = m + (constrain ? 1 : 0);
    Eigen::VectorXd wts = Eigen::VectorXd::Ones(m);
    Eigen::VectorXd best;
    double best_sup = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd Aw(rows, n);
    Eigen::VectorXd yw(rows);
    for (int it = 0; it <= iters; ++it) {
        for (Eigen::Index i = 0; i < m; ++i) {
            const double sw = std::sqrt(wts(i));
            Aw.row(i) = sw * A.row(i);
            yw(i) = sw * y(i);
        }
        if (constrain) {
            Aw.row(m).setConstant(kConstraintWeight);
            yw(m) = 0.0;
        }
        Eigen::VectorXd c = Aw.colPivHouseholderQr().solve(yw);
        Eigen::VectorXd r = A * c - y;
        const double sup = r.lpNorm<Eigen::Infinity>();
        if (sup < best_sup) {
            best_sup = sup;
            best = std::move(c);
        }
        if (it == iters) break;
        const double floor = 1e-4 * (sup > 0.0 ? sup : 1.0);
        for (Eigen::Index i = 0; i < m; ++i) wts(i) *= std::abs(r(i)) + floor;
        wts /= wts.mean();
    }
    return best;
}

// Drop the smallest coefficients while the discarded sup-norm mass stays
// within the budget; the certificate then measures the pruned model, so no
// further accounting is needed.
void prune_coeffs(std::vector<double>& c, double col_sup, double budget) {
    if (budget <= 0.0) return;
    std::vector<std::size_t> order(c.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::abs(c[a]) < std::abs(c[b]); });
    double used = 0.0;
    for (std::size_t idx : order) {
        const double cost = std::abs(c[idx]) * col_sup;
        if (used + cost > budget) break;
        used += cost;
        c[idx] = 0.0;
    }
}

struct SigmaModel {
    const Basis* bs;
    std::vector<Column> cols;   // only kept columns
    std::vector<double> c;
    double csum = 0.0;

    // Columns regrouped by scale with sorted centers and prefix sums.  An
    // evaluation then touches only the columns whose σ is still transitioning
    // at x; everything farther than win_u scales away sits in its saturated
    // regime and is covered by a prefix sum plus an envelope-at-win_u error
    // term, so the cost per point is O(active columns), not O(all columns).
    struct Group {
        double scale = 0.0;
        std::vector<double> center;  // ascending
        std::vector<double> coef;
        std::vector<double> pre_c;   // prefix sums of coef
        std::vector<double> pre_a;   // prefix sums of |coef|
    };
    std::vector<Group> groups;
    double win_u = 0.0;
    double sat_val = 0.0, sat_d1 = 0.0, sat_d2 = 0.0;  // envelopes at win_u

    // pick the saturation radius so the far-field error terms stay well under
    // eps even after entering the cell bound (value directly, derivative
    // scaled by h/2, curvature by h²/8 with h at most half the top scale)
    void finalize(double eps) {
        groups.clear();
        if (bs->pl) return;  // exact piecewise-linear route never marches
        std::vector<std::size_t> order(cols.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return cols[a].scale != cols[b].scale ? cols[a].scale < cols[b].scale
                                                  : cols[a].center < cols[b].center;
        });
        for (std::size_t idx : order) {
            if (groups.empty() || groups.back().scale != cols[idx].scale)
                groups.push_back({cols[idx].scale, {}, {}, {}, {}});
            groups.back().center.push_back(cols[idx].center);
            groups.back().coef.push_back(c[idx]);
        }
        double amass = 0.0, dmass = 0.0, d2mass = 0.0, smax = 0.0;
        for (auto& g : groups) {
            g.pre_c.assign(g.center.size() + 1, 0.0);
            g.pre_a.assign(g.center.size() + 1, 0.0);
            for (std::size_t i = 0; i < g.center.size(); ++i) {
                g.pre_c[i + 1] = g.pre_c[i] + g.coef[i];
                g.pre_a[i + 1] = g.pre_a[i] + std::abs(g.coef[i]);
            }
            amass += g.pre_a.back();
            dmass += g.pre_a.back() / g.scale;
            d2mass += g.pre_a.back() / (g.scale * g.scale);
            smax = std::max(smax, g.scale);
        }
        const double tol = std::max(1e-300, 1e-3 * eps);
        double w = 4.0;
        const auto widen = [&](double mass, double a, double r, double mult) {
            if (r > 0.0 && mass * a * mult > tol)
                w = std::max(w, std::log(mass * a * mult / tol) / r);
        };
        widen(amass, bs->tail_a, bs->tail_r, 1.0);
        widen(dmass, bs->a1, bs->r1, smax / 4.0);
        widen(d2mass, bs->a2, bs->r2, smax * smax / 8.0);
        win_u = w;
        sat_val = bs->tail_a * std::exp(-bs->tail_r * w);
        sat_d1 = bs->a1 * std::exp(-bs->r1 * w);
        sat_d2 = std::min(bs->d2max, bs->a2 * std::exp(-bs->r2 * w));
    }

    // model value at x plus a rigorous bound on the neglected saturation error
    double value_win(double x, double& err) const {
        double v = 0.0, e = 0.0;
        for (const auto& g : groups) {
            const double R = win_u * g.scale;
            const auto b = g.center.begin();
            const std::size_t i0 =
                static_cast<std::size_t>(std::lower_bound(b, g.center.end(), x - R) - b);
            const std::size_t i1 =
                static_cast<std::size_t>(std::upper_bound(b, g.center.end(), x + R) - b);
            for (std::size_t j = i0; j < i1; ++j)
                v += g.coef[j] * bs->s((x - g.center[j]) / g.scale);
            // centers below x−R are saturated at the upper limit, above x+R
            // at the lower one (zero in both conventions used here)
            if (!bs->bump) v += g.pre_c[i0];
            e += (g.pre_a[i0] + g.pre_a.back() - g.pre_a[i1]) * sat_val;
        }
        err = e;
        return v;
    }
    double deriv_win(double x, double& err) const {
        double v = 0.0, e = 0.0;
        for (const auto& g : groups) {
            const double R = win_u * g.scale;
            const auto b = g.center.begin();
            const std::size_t i0 =
                static_cast<std::size_t>(std::lower_bound(b, g.center.end(), x - R) - b);
            const std::size_t i1 =
                static_cast<std::size_t>(std::upper_bound(b, g.center.end(), x + R) - b);
            for (std::size_t j = i0; j < i1; ++j)
                v += g.coef[j] / g.scale * bs->ds((x - g.center[j]) / g.scale);
            e += (g.pre_a[i0] + g.pre_a.back() - g.pre_a[i1]) / g.scale * sat_d1;
        }
        err = e;
        return v;
    }
    // Σ |c_j|/s_j² · envelope(|σ''|) over the cell [x1, x2]
    double d2_bound(double x1, double x2) const {
        double v = 0.0;
        for (const auto& g : groups) {
            const double R = win_u * g.scale, s2 = g.scale * g.scale;
            const auto b = g.center.begin();
            const std::size_t i0 =
                static_cast<std::size_t>(std::lower_bound(b, g.center.end(), x1 - R) - b);
            const std::size_t i1 =
                static_cast<std::size_t>(std::upper_bound(b, g.center.end(), x2 + R) - b);
            for (std::size_t j = i0; j < i1; ++j) {
                const double u1 = (x1 - g.center[j]) / g.scale;
                const double u2 = (x2 - g.center[j]) / g.scale;
                const double dist = u1 > 0.0 ? u1 : (u2 < 0.0 ? -u2 : 0.0);
                v += std::abs(g.coef[j]) / s2 *
                     std::min(bs->d2max, bs->a2 * std::exp(-bs->r2 * dist));
            }
            v += (g.pre_a[i0] + g.pre_a.back() - g.pre_a[i1]) / s2 * sat_d2;
        }
        return v;
    }
    // bound on |model| for x ≥ X (right) or x ≤ X (left)
    double tail_bound(double X, bool right) const {
        double v = std::abs(csum) * (bs->bump ? 0.0 : 1.0) * (right ? 1.0 : 0.0);
        for (const auto& g : groups) {
            const double R = win_u * g.scale;
            const auto b = g.center.begin();
            if (right) {
                const std::size_t i0 =
                    static_cast<std::size_t>(std::lower_bound(b, g.center.end(), X - R) - b);
                v += g.pre_a[i0] * sat_val;
                for (std::size_t j = i0; j < g.center.size(); ++j) {
                    const double dist = (X - g.center[j]) / g.scale;
                    v += std::abs(g.coef[j]) * bs->tail_a *
                         std::exp(-bs->tail_r * std::max(0.0, dist));
                }
            } else {
                const std::size_t i1 =
                    static_cast<std::size_t>(std::upper_bound(b, g.center.end(), X + R) - b);
                for (std::size_t j = 0; j < i1; ++j) {
                    const double dist = (g.center[j] - X) / g.scale;
                    v += std::abs(g.coef[j]) * bs->tail_a *
                         std::exp(-bs->tail_r * std::max(0.0, dist));
                }
                v += (g.pre_a.back() - g.pre_a[i1]) * sat_val;
            }
        }
        return v;
    }
};

// Exact certificate when σ has a piecewise-linear form: build the model as a
// PwLinear and take the sup of the difference directly.
SupNormCertificate certify_exact_pl(const SigmaModel& m, const PwLinear& target) {
    PwLinear model = PwLinear::constant(0.0);
    for (std::size_t j = 0; j < m.cols.size(); ++j) {
        if (m.c[j] == 0.0) continue;
        const double w = 1.0 / m.cols[j].scale, b = -m.cols[j].center / m.cols[j].scale;
        model = model + m.bs->pl->affine_arg(w, b) * m.c[j];
    }
    const PwLinear d = model - target;
    SupNormCertificate cert;
    cert.grid_max = d.sup_abs();
    cert.lipschitz_slack = 0.0;
    cert.tail_bound = std::max(std::abs(d.knots_y().front()), std::abs(d.knots_y().back()));
    cert.total = cert.grid_max;
    cert.domain_radius = std::max(std::abs(d.knots_x().front()), std::abs(d.knots_x().back()));
    cert.grid_step = 0.0;
    return cert;
}

double slope_at(const PwLinear& f, double x) {
    const auto& xs = f.knots_x();
    if (x <= xs.front()) return f.left_slope();
    if (x >= xs.back()) return f.right_slope();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    return (f.knots_y()[i + 1] - f.knots_y()[i]) / (xs[i + 1] - xs[i]);
}

// Interval-march certificate for smooth σ.  Within a cell that contains no
// target knot, d = model − target is C², so
//   sup_cell |d| ≤ |d(mid)| + |d'(mid)|·h/2 + D₂·h²/8.
// Cells shrink until their bound clears eps; target knots are forced cell
// boundaries.  Fails fast once the running bound exceeds eps.
SupNormCertificate certify_march(const SigmaModel& m, const PwLinear& target,
                                 double s_finest, double s0, double eps,
                                 double win_lo, double win_hi) {
    double W_lo = win_lo, W_hi = win_hi;
    for (int i = 0; i < 4000 && m.tail_bound(W_hi, true) > 0.25 * eps; ++i) W_hi += s0;
    for (int i = 0; i < 4000 && m.tail_bound(W_lo, false) > 0.25 * eps; ++i) W_lo -= s0;

    std::vector<double> bounds{W_lo};
    for (double kx : target.knots_x())
        if (kx > W_lo && kx < W_hi) bounds.push_back(kx);
    bounds.push_back(W_hi);

    SupNormCertificate cert;
    cert.domain_radius = std::max(std::abs(W_lo), std::abs(W_hi));
    cert.tail_bound = std::max(m.tail_bound(W_hi, true), m.tail_bound(W_lo, false));
    const double h_min = std::max(1e-9, 1e-3 * s_finest);
    double grid_max = 0.0, cell_max = 0.0, h_max_used = 0.0;

    for (std::size_t seg = 0; seg + 1 < bounds.size(); ++seg) {
        const double B = bounds[seg + 1];
        double x = bounds[seg];
        double h = s0 / 4.0;
        while (x < B - 1e-15) {
            h = std::min(h * 1.6, s0 / 2.0);
            double bound = 0.0, dm = 0.0;
            for (;;) {
                const double hi = std::min(x + h, B);
                const double mid = 0.5 * (x + hi);
                const double half = 0.5 * (hi - x);
                double verr = 0.0, perr = 0.0;
                dm = std::abs(m.value_win(mid, verr) - target(mid)) + verr;
                const double dp =
                    std::abs(m.deriv_win(mid, perr) - slope_at(target, mid)) + perr;
                bound = dm + dp * half + m.d2_bound(x, hi) * half * half / 2.0;
                if (bound <= 0.98 * eps || h <= h_min) break;
                h *= 0.5;
            }
            const double hi = std::min(x + h, B);
            grid_max = std::max(grid_max, dm);
            cell_max = std::max(cell_max, bound);
            h_max_used = std::max(h_max_used, hi - x);
            if (bound > 1.05 * eps && h <= h_min) {
                // refinement exhausted: report the failure honestly
                cert.grid_max = grid_max;
                cert.lipschitz_slack = cell_max - grid_max;
                cert.total = std::max(cell_max, cert.tail_bound);
                cert.grid_step = h_max_used;
                return cert;
            }
            x = hi;
        }
    }
    cert.grid_max = grid_max;
    cert.lipschitz_slack = cell_max - grid_max;
    cert.total = std::max(cell_max, cert.tail_bound);
    cert.grid_step = h_max_used;
    return cert;
}

int auto_depth(double eps) {
    // empirical ladder error model: err(depth) ≈ 2.4e−3 · 4.2^(5−depth)
    const double d = 5.0 + std::log(2.4e-3 / eps) / std::log(4.2);
    return std::clamp(static_cast<int>(std::ceil(d)), 2, 10);
}

Network lower_model(const SigmaModel& m, const Activation& phi) {
    std::vector<Unit> units;
    std::vector<double> coeffs;
    double bias = 0.0;
    for (std::size_t j = 0; j < m.cols.size(); ++j) {
        const double w = 1.0 / m.cols[j].scale, b = -m.cols[j].center / m.cols[j].scale;
        m.bs->lower(w, b, m.c[j], units, coeffs, bias);
    }
    return Network::one_layer(1, std::move(units), phi, std::move(coeffs), bias);
}

SigmaModel make_model(const Basis& bs, const std::vector<Column>& cols,
                      const Eigen::VectorXd& sol, double eps, double col_sup) {
    std::vector<double> c(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) c[j] = sol(static_cast<Eigen::Index>(j));
    prune_coeffs(c, col_sup, 0.03 * eps);
    SigmaModel m{&bs, {}, {}, 0.0};
    for (std::size_t j = 0; j < cols.size(); ++j) {
        if (c[j] == 0.0) continue;
        m.cols.push_back(cols[j]);
        m.c.push_back(c[j]);
        m.csum += c[j];
    }
    if (m.cols.empty()) {  // degenerate fit: keep the largest column
        std::size_t jmax = 0;
        for (std::size_t j = 1; j < cols.size(); ++j)
            if (std::abs(sol(static_cast<Eigen::Index>(j))) >
                std::abs(sol(static_cast<Eigen::Index>(jmax))))
                jmax = j;
        m.cols.push_back(cols[jmax]);
        m.c.push_back(sol(static_cast<Eigen::Index>(jmax)));
        m.csum = m.c[0];
    }
    m.finalize(eps);
    return m;
}

SupNormCertificate certify_model(const SigmaModel& m, const PwLinear& target,
                                 double s_finest, double s0, double eps,
                                 double win_lo, double win_hi) {
    if (m.bs->pl) return certify_exact_pl(m, target);
    return certify_march(m, target, s_finest, s0, eps, win_lo, win_hi);
}

}  // namespace

Expansion fit_pl(const PwLinear& target, const Activation& phi, double eps,
                 const SynthOptions& opt) {
    if (!target.compact_support())
        throw DegenerateData("fit_pl: target must have compact support");
    if (phi.is_piecewise_linear()) {
        const auto pj = nonzero_slope_jumps(phi.pw());
        if (pj.empty()) throw DegenerateActivation("fit_pl: activation is affine");
        if (pj.size() == 1) return exact_single_kink(target, phi);
        if (pj.size() == 2 && phi.pw().left_slope() == 0.0 &&
            phi.pw().right_slope() == 0.0)
            return exact_ramp(target, phi);
    } else {
        switch (phi.kind()) {
        case ActKind::Tanh:
        case ActKind::Logistic:
        case ActKind::Softplus:
        case ActKind::Gaussian:
            break;
        default:
            throw UnsupportedActivationClass(
                "fit_pl: no synthesis route for activation '" + phi.name() + "'");
        }
    }
    if (eps <= 0.0)
        throw TargetNotMet(
            "fit_pl: exact synthesis is not available for activation '" +
                phi.name() + "'",
            std::numeric_limits<double>::infinity());

    const Basis bs = basis_for(phi);
    const double col_sup = bs.pl && bs.bump ? bs.pl->sup_abs() : 1.0;
    const auto& kinks = target.knots_x();
    const double s0 = min_spacing(kinks);
    const double pad = opt.pad > 0.0 ? opt.pad : 4.0 * s0;
    const double lo = target.support_lo() - pad, hi = target.support_hi() + pad;

    double best_total = std::numeric_limits<double>::infinity();
    const int d0 = opt.depth > 0 ? opt.depth : auto_depth(eps);
    for (int depth = d0; depth <= std::max(d0, opt.max_depth); ++depth) {
        const auto cols = build_dictionary(kinks, target.support_lo(),
                                           target.support_hi(), s0, depth);
        const double s_finest = s0 / std::ldexp(1.0, depth);
        const auto xs = sample_grid(lo, hi, s0, s_finest, 2 * cols.size() + 8);
        const Eigen::MatrixXd A = design_matrix(bs, cols, xs);
        Eigen::VectorXd y(static_cast<Eigen::Index>(xs.size()));
        for (std::size_t i = 0; i < xs.size(); ++i)
            y(static_cast<Eigen::Index>(i)) = target(xs[i]);
        const Eigen::VectorXd sol = solve_lawson(A, y, !bs.bump, opt.lawson_iters);
        const SigmaModel m = make_model(bs, cols, sol, eps, col_sup);
        const SupNormCertificate cert = certify_model(m, target, s_finest, s0, eps, lo, hi);
        best_total = std::min(best_total, cert.total);
        if (cert.total <= eps)
            return Expansion{lower_model(m, phi), cert.total, cert};
    }
    std::ostringstream msg;
    msg << "fit_pl: certified error " << best_total << " exceeds target " << eps;
    throw TargetNotMet(msg.str(), best_total);
}

Expansion expand_profile(const RidgeProfile& g, const Activation& phi, double eps,
                         const SynthOptions& opt) {
    return fit_pl(g.g, phi, eps, opt);
}

CompiledRiemann compile_riemann(const RidgeProfile& g, int N, const Activation& phi,
                                double eps) {
    if (N < 1) throw ConfigError("compile_riemann: N must be positive");
    Expansion e = expand_profile(g, phi, eps);
    std::vector<std::pair<Network, double>> parts;
    parts.reserve(static_cast<std::size_t>(N));
    const double w = kTwoPi / N;
    for (int k = 0; k < N; ++k) {
        const double th = kTwoPi * k / N;
        parts.emplace_back(
            affine_precompose(e.net, {{std::cos(th), std::sin(th)}}, {0.0}), w);
    }
    Network net = linear_combine(parts);
    const double bound = kTwoPi * e.error_bound;
    return CompiledRiemann{std::move(net), bound, std::move(e)};
}

// ---------------------------------------------------------------------------

struct SharedSynth::Impl {
    Activation phi;
    Basis bs;
    std::vector<Column> cols;
    std::vector<double> xs;
    Eigen::MatrixXd A;                        // unweighted design matrix
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    bool constrained = false;
    double s0 = 1.0, s_finest = 1.0;
    double win_lo = 0.0, win_hi = 0.0;
    double col_sup = 1.0;
};

SharedSynth::SharedSynth(const Activation& phi, const std::vector<double>& kinks,
                         double lo, double hi, int depth, const SynthOptions& opt)
    : impl_(std::make_unique<Impl>(Impl{phi, basis_for(phi), {}, {}, {}, {}, false,
                                        1.0, 1.0, 0.0, 0.0, 1.0})) {
    if (kinks.empty() || !(hi > lo))
        throw DegenerateData("SharedSynth: empty kink set or empty window");
    if (depth < 1) throw ConfigError("SharedSynth: depth must be positive");
    Impl& im = *impl_;
    std::vector<double> ks = kinks;
    std::sort(ks.begin(), ks.end());
    im.s0 = min_spacing(ks);
    im.s_finest = im.s0 / std::ldexp(1.0, depth);
    const double pad = opt.pad > 0.0 ? opt.pad : 4.0 * im.s0;
    im.win_lo = lo - pad;
    im.win_hi = hi + pad;
    im.cols = build_dictionary(ks, lo, hi, im.s0, depth);
    im.xs = sample_grid(im.win_lo, im.win_hi, im.s0, im.s_finest, 2 * im.cols.size() + 8);
    im.constrained = !im.bs.bump;
    im.col_sup = im.bs.pl && im.bs.bump ? im.bs.pl->sup_abs() : 1.0;
    im.A = design_matrix(im.bs, im.cols, im.xs);
    const Eigen::Index m = im.A.rows(), n = im.A.cols();
    Eigen::MatrixXd M(m + (im.constrained ? 1 : 0), n);
    M.topRows(m) = im.A;
    if (im.constrained) M.row(m).setConstant(kConstraintWeight);
    im.qr.compute(M);
}

SharedSynth::~SharedSynth() = default;
SharedSynth::SharedSynth(SharedSynth&&) noexcept = default;
SharedSynth& SharedSynth::operator=(SharedSynth&&) noexcept = default;

std::size_t SharedSynth::column_count() const { return impl_->cols.size(); }

Expansion SharedSynth::fit(const PwLinear& target, double eps) const {
    const Impl& im = *impl_;
    if (eps <= 0.0)
        throw TargetNotMet("SharedSynth: eps must be positive",
                           std::numeric_limits<double>::infinity());
    Eigen::VectorXd y(im.A.rows() + (im.constrained ? 1 : 0));
    for (std::size_t i = 0; i < im.xs.size(); ++i)
        y(static_cast<Eigen::Index>(i)) = target(im.xs[i]);
    if (im.constrained) y(im.A.rows()) = 0.0;
    const Eigen::VectorXd sol = im.qr.solve(y);
    const SigmaModel m = make_model(im.bs, im.cols, sol, eps, im.col_sup);
    const SupNormCertificate cert =
        certify_model(m, target, im.s_finest, im.s0, eps, im.win_lo, im.win_hi);
    if (cert.total > eps) {
        std::ostringstream msg;
        msg << "SharedSynth: certified error " << cert.total << " exceeds target " << eps;
        throw TargetNotMet(msg.str(), cert.total);
    }
    return Expansion{lower_model(m, im.phi), cert.total, cert};
}

}  // namespace uniapprox
