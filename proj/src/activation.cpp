#include "uniapprox/activation.hpp"

#include <cmath>

#include "uniapprox/errors.hpp"

namespace uniapprox {

namespace {

double stable_softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

double stable_logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

Activation Activation::relu() {
    return Activation("relu", PwLinear::relu(), AsympLinear{1.0, 0.0, 0.0, 0.0});
}

Activation Activation::leaky_relu() {
    PwLinear pl({0.0}, {0.0}, 0.01, 1.0);
    return Activation("leaky_relu", std::move(pl), AsympLinear{1.0, 0.0, 0.01, 0.0});
}

Activation Activation::softplus() {
    return Activation("softplus", [](double x) { return stable_softplus(x); },
                      AsympLinear{1.0, 0.0, 0.0, 0.0}, 1.0, ActKind::Softplus);
}

Activation Activation::tanh_act() {
    return Activation("tanh", [](double x) { return std::tanh(x); },
                      FiniteLimits{-1.0, 1.0}, 1.0, ActKind::Tanh);
}

Activation Activation::logistic() {
    return Activation("logistic", [](double x) { return stable_logistic(x); },
                      FiniteLimits{0.0, 1.0}, 0.25, ActKind::Logistic);
}

Activation Activation::gaussian() {
    return Activation("gaussian", [](double x) { return std::exp(-x * x); },
                      FiniteLimits{0.0, 0.0},
                      std::sqrt(2.0) * std::exp(-0.5), ActKind::Gaussian);
}

Activation Activation::unit_ramp() {
    return Activation("v1", PwLinear::unit_ramp(), FiniteLimits{0.0, 1.0});
}

Activation Activation::from_pwlinear(std::string name, PwLinear pl) {
    Asymptotics asym;
    const double ls = pl.left_slope(), rs = pl.right_slope();
    if (ls == 0.0 && rs == 0.0) {
        asym = FiniteLimits{pl.knots_y().front(), pl.knots_y().back()};
    } else {
        const double b1 = pl.knots_y().back() - rs * pl.knots_x().back();
        const double b2 = pl.knots_y().front() - ls * pl.knots_x().front();
        asym = AsympLinear{rs, b1, ls, b2};
    }
    return Activation(std::move(name), std::move(pl), asym);
}

Activation Activation::by_name(const std::string& id) {
    if (id == "relu") return relu();
    if (id == "leaky_relu" || id == "leaky-relu") return leaky_relu();
    if (id == "softplus") return softplus();
    if (id == "tanh") return tanh_act();
    if (id == "logistic" || id == "sigmoid") return logistic();
    if (id == "gaussian") return gaussian();
    if (id == "v1" || id == "unit_ramp" || id == "unit-ramp") return unit_ramp();
    throw ConfigError("unknown activation: " + id);
}

std::vector<double> default_probe_ts() {
    std::vector<double> ts;
    for (int k = 4; k <= 20; ++k) ts.push_back(std::ldexp(1.0, k));
    return ts;
}

namespace {

struct SideResult {
    bool is_limit = false;
    bool is_line = false;
    double limit = 0.0;
    double a = 0.0, b = 0.0;
    double residual = 0.0;
};

// Analyze one tail from samples y_i = φ(s·t_i), s = ±1, t increasing.
SideResult analyze_side(const std::vector<double>& ts,
                        const std::vector<double>& ys, double sgn) {
    constexpr double kTol = 1e-8;
    SideResult r;
    // Finite limit: three consecutive probes within tolerance.
    for (std::size_t i = 2; i < ys.size(); ++i) {
        const double d1 = std::abs(ys[i] - ys[i - 1]);
        const double d2 = std::abs(ys[i - 1] - ys[i - 2]);
        if (d1 <= kTol && d2 <= kTol) {
            r.is_limit = true;
            r.limit = ys[i];
            r.residual = d1;
            return r;
        }
    }
    // Asymptotic line: successive difference quotients stabilize, then the
    // intercept y − a·x must stabilize as well.
    std::vector<double> slopes, intercepts;
    for (std::size_t i = 1; i < ys.size(); ++i)
        slopes.push_back((ys[i] - ys[i - 1]) / (sgn * (ts[i] - ts[i - 1])));
    for (std::size_t i = 2; i < slopes.size(); ++i) {
        const double d1 = std::abs(slopes[i] - slopes[i - 1]);
        const double d2 = std::abs(slopes[i - 1] - slopes[i - 2]);
        if (d1 <= kTol && d2 <= kTol) {
            const double a = slopes[i];
            // check intercept convergence on the last few probes
            const std::size_t j = ys.size() - 1;
            const double b1 = ys[j] - a * sgn * ts[j];
            const double b2 = ys[j - 1] - a * sgn * ts[j - 1];
            const double b3 = ys[j - 2] - a * sgn * ts[j - 2];
            if (std::abs(b1 - b2) <= 1e-6 * (1.0 + std::abs(b1)) &&
                std::abs(b2 - b3) <= 1e-6 * (1.0 + std::abs(b2))) {
                r.is_line = true;
                r.a = a;
                r.b = b1;
                r.residual = std::abs(b1 - b2);
                return r;
            }
        }
    }
    r.residual = std::abs(ys.back() - ys[ys.size() - 2]);
    return r;
}

}  // namespace

ClassifyReport classify(const std::function<double(double)>& phi,
                        const std::vector<double>& probe_ts) {
    if (probe_ts.size() < 4)
        throw DegenerateData("classify: need at least 4 probe points");
    for (std::size_t i = 1; i < probe_ts.size(); ++i)
        if (!(probe_ts[i] > probe_ts[i - 1]))
            throw DegenerateData("classify: probes must increase");

    std::vector<double> yp, ym;
    for (double t : probe_ts) {
        yp.push_back(phi(t));
        ym.push_back(phi(-t));
    }
    const SideResult plus = analyze_side(probe_ts, yp, 1.0);
    const SideResult minus = analyze_side(probe_ts, ym, -1.0);
    if ((!plus.is_limit && !plus.is_line) || (!minus.is_limit && !minus.is_line))
        throw NonConvergent("classify: probes did not stabilize at the largest t");

    ClassifyReport rep{};
    rep.residual = std::max(plus.residual, minus.residual);
    if (plus.is_limit && minus.is_limit) {
        rep.tag = FiniteLimits{minus.limit, plus.limit};
    } else {
        AsympLinear al;
        if (plus.is_line) { al.a1 = plus.a; al.b1 = plus.b; }
        else { al.a1 = 0.0; al.b1 = plus.limit; }
        if (minus.is_line) { al.a2 = minus.a; al.b2 = minus.b; }
        else { al.a2 = 0.0; al.b2 = minus.limit; }
        rep.tag = al;
    }
    return rep;
}

ClassifyReport classify(const Activation& phi, const std::vector<double>& probe_ts) {
    return classify([&phi](double x) { return phi(x); }, probe_ts);
}

namespace {

// Probe-grid affinity check: φ is (numerically) affine iff its second
// difference vanishes relative to its own scale on a coarse grid.
bool numerically_affine(const Activation& phi) {
    if (phi.is_piecewise_linear()) {
        const auto& pl = phi.pw();
        // exact: all segment slopes equal the outer slopes
        const auto& xs = pl.knots_x();
        const auto& ys = pl.knots_y();
        double s0 = pl.left_slope();
        for (std::size_t i = 1; i < xs.size(); ++i) {
            const double s = (ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]);
            if (std::abs(s - s0) > 0.0) return false;
        }
        return pl.right_slope() == s0;
    }
    double scale = 0.0, dev = 0.0;
    for (int i = -40; i <= 40; ++i) {
        const double x = 0.25 * i;
        const double chi = phi(x - 2.0) - 2.0 * phi(x - 1.0) + phi(x);
        scale = std::max(scale, std::abs(phi(x)));
        dev = std::max(dev, std::abs(chi));
    }
    return dev <= 1e-12 * (1.0 + scale);
}

}  // namespace

Activation second_difference(const Activation& phi) {
    if (std::holds_alternative<OtherAsymptotics>(phi.asymptotics()))
        throw UnsupportedActivationClass(
            "second_difference: unclassified asymptotics for " + phi.name());
    if (numerically_affine(phi))
        throw DegenerateActivation("second_difference: affine activation " +
                                   phi.name());
    const std::string name = "second_diff(" + phi.name() + ")";
    // Evaluation is the literal 3-term combination — identical arithmetic to
    // a (1,−2,1)-coefficient network over shifted copies of φ.
    if (phi.is_piecewise_linear()) {
        PwLinear chi = phi.pw().shifted(2.0) - phi.pw().shifted(1.0) * 2.0 +
                       phi.pw();
        return Activation(name, std::move(chi), FiniteLimits{0.0, 0.0});
    }
    auto fn = [phi](double x) {
        return phi(x - 2.0) - 2.0 * phi(x - 1.0) + phi(x);
    };
    return Activation(name, std::move(fn), FiniteLimits{0.0, 0.0},
                      4.0 * phi.lipschitz());
}

Activation shift_difference(const Activation& phi) {
    const auto* fl = std::get_if<FiniteLimits>(&phi.asymptotics());
    if (fl == nullptr)
        throw UnsupportedActivationClass(
            "shift_difference: needs finite limits, got " + phi.name());
    // constant check: probe a grid
    double lo = phi(-64.0), dev = 0.0;
    for (int i = -32; i <= 32; ++i) dev = std::max(dev, std::abs(phi(2.0 * i) - lo));
    if (dev <= 1e-14)
        throw DegenerateActivation("shift_difference: constant activation");
    const std::string name = "shift_diff(" + phi.name() + ")";
    if (phi.is_piecewise_linear()) {
        PwLinear d = phi.pw() - phi.pw().shifted(1.0);
        return Activation(name, std::move(d), FiniteLimits{0.0, 0.0});
    }
    auto fn = [phi](double x) { return phi(x) - phi(x - 1.0); };
    return Activation(name, std::move(fn), FiniteLimits{0.0, 0.0},
                      2.0 * phi.lipschitz());
}

}  // namespace uniapprox
