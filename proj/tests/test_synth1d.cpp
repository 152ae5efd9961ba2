#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "uniapprox/activation.hpp"
#include "uniapprox/errors.hpp"
#include "uniapprox/profile.hpp"
#include "uniapprox/ridge2d.hpp"
#include "uniapprox/synth1d.hpp"

using namespace uniapprox;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Independent check of a 1-D certificate: dense scan of |net − target| on a
// window comfortably containing the support plus a far-tail probe.
double dense_scan(const Network& net, const PwLinear& target, double lo, double hi,
                  int n = 20000) {
    double worst = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double x = lo + (hi - lo) * i / n;
        worst = std::max(worst, std::abs(net(x) - target(x)));
    }
    for (double x : {-50.0, -20.0, 20.0, 50.0})
        worst = std::max(worst, std::abs(net(x) - target(x)));
    return worst;
}

}  // namespace

TEST_SUITE("synth1d") {

TEST_CASE("relu expansion of the standard profile is exact with 7 units") {
    const RidgeProfile g = standard_profile();
    const Expansion e = expand_profile(g, Activation::relu(), 0.0);
    CHECK(e.net.unit_count() == 7);
    CHECK(e.error_bound == 0.0);
    CHECK(e.cert.total == 0.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-8.0, 8.0);
    for (int i = 0; i < 400; ++i) {
        const double x = U(rng);
        CHECK(std::abs(e.net(x) - g(x)) < 1e-14);
    }
    // well past the support the bookkeeping units must cancel exactly
    CHECK(e.net(300.0) == doctest::Approx(0.0).scale(1.0));
    CHECK(e.net(-300.0) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("leaky relu peels to the same knot skeleton") {
    const RidgeProfile g = standard_profile();
    const Expansion e = expand_profile(g, Activation::leaky_relu(), 0.0);
    CHECK(e.error_bound == 0.0);
    CHECK(e.net.unit_count() == 7);
    for (int i = 0; i <= 1000; ++i) {
        const double x = -5.0 + 10.0 * i / 1000;
        CHECK(std::abs(e.net(x) - g(x)) < 1e-14);
    }
}

TEST_CASE("unit-ramp expansion uses one unit per sloped interval") {
    const RidgeProfile g = standard_profile();
    const Expansion e = expand_profile(g, Activation::unit_ramp(), 0.0);
    CHECK(e.net.unit_count() == 4);
    CHECK(e.error_bound == 0.0);
    for (int i = 0; i <= 1000; ++i) {
        const double x = -6.0 + 12.0 * i / 1000;
        CHECK(std::abs(e.net(x) - g(x)) < 1e-14);
    }
}

TEST_CASE("tanh expansion certifies eps = 0.05 and the scan agrees") {
    const RidgeProfile g = standard_profile();
    const Expansion e = expand_profile(g, Activation::tanh_act(), 0.05);
    CHECK(e.error_bound <= 0.05);
    CHECK(e.cert.total == e.error_bound);
    const double scanned = dense_scan(e.net, g.g, -9.0, 9.0);
    CHECK(scanned <= e.cert.total + 1e-12);  // certificate soundness
    CHECK(scanned <= 0.05);
}

TEST_CASE("tanh cannot hit eps = 0") {
    CHECK_THROWS_AS(expand_profile(standard_profile(), Activation::tanh_act(), 0.0),
                    TargetNotMet);
}

TEST_CASE("logistic, softplus, and gaussian routes certify moderate targets") {
    const RidgeProfile g = standard_profile();
    for (const auto& [phi, eps] :
         {std::pair{Activation::logistic(), 0.05},
          std::pair{Activation::softplus(), 0.05},
          std::pair{Activation::gaussian(), 0.1}}) {
        const Expansion e = expand_profile(g, phi, eps);
        CHECK(e.error_bound <= eps);
        const double scanned = dense_scan(e.net, g.g, -9.0, 9.0);
        CHECK(scanned <= e.cert.total + 1e-12);
    }
}

TEST_CASE("bounded piecewise-linear activations go through exact algebra certificates") {
    const RidgeProfile g = standard_profile();
    // three-kink staircase: bounded, distinct limits, not a plain ramp
    const PwLinear stairs({0.0, 0.5, 1.0, 2.0}, {0.0, 0.55, 0.7, 1.0});
    const Activation phi = Activation::from_pwlinear("stairs", stairs);
    const Expansion e = expand_profile(g, phi, 0.02);
    CHECK(e.error_bound <= 0.02);
    CHECK(e.cert.lipschitz_slack == 0.0);  // algebraic, not grid-based
    const double scanned = dense_scan(e.net, g.g, -9.0, 9.0);
    CHECK(scanned <= e.cert.total + 1e-10);
}

TEST_CASE("unbounded piecewise-linear activations reduce to a compact bump") {
    const RidgeProfile g = standard_profile();
    // two kinks with distinct outer slopes: no exact route, bump route applies
    const PwLinear bent({-1.0, 1.0}, {0.5, 0.8}, -0.3, 1.0);
    const Activation phi = Activation::from_pwlinear("bent", bent);
    const Expansion e = expand_profile(g, phi, 0.05);
    CHECK(e.error_bound <= 0.05);
    const double scanned = dense_scan(e.net, g.g, -9.0, 9.0);
    CHECK(scanned <= e.cert.total + 1e-10);
}

TEST_CASE("classification of unusable inputs") {
    const RidgeProfile g = standard_profile();
    const Activation smooth_custom("mystery", [](double x) { return std::sin(x); },
                                   OtherAsymptotics{}, 1.0);
    CHECK_THROWS_AS(expand_profile(g, smooth_custom, 0.1), UnsupportedActivationClass);
    const PwLinear line({0.0}, {0.0}, 1.0, 1.0);
    CHECK_THROWS_AS(expand_profile(g, Activation::from_pwlinear("line", line), 0.1),
                    DegenerateActivation);
    CHECK_THROWS_AS(fit_pl(PwLinear::relu(), Activation::relu(), 0.1), DegenerateData);
}

TEST_CASE("compile_riemann with relu reproduces the Riemann net exactly") {
    const RidgeProfile g = standard_profile();
    const int N = 16;
    const CompiledRiemann cr = compile_riemann(g, N, Activation::relu(), 0.0);
    CHECK(cr.error_bound == 0.0);
    CHECK(cr.net.unit_count() == static_cast<std::size_t>(N) * 7);
    const Network fn = riemann_net(g, N);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-6.0, 6.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = U(rng), y = U(rng);
        CHECK(std::abs(cr.net(x, y) - fn(x, y)) < 1e-12);
    }
}

TEST_CASE("compile_riemann with tanh keeps the 2-pi-eps budget") {
    const RidgeProfile g = standard_profile();
    const int N = 64;
    const double eps = 0.01;
    const CompiledRiemann cr = compile_riemann(g, N, Activation::tanh_act(), eps);
    CHECK(cr.error_bound <= kTwoPi * eps);
    const Network fn = riemann_net(g, N);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> U(-5.0, 5.0);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double x = U(rng), y = U(rng);
        worst = std::max(worst, std::abs(cr.net(x, y) - fn(x, y)));
    }
    CHECK(worst <= cr.error_bound + 1e-12);
    CHECK_THROWS_AS(compile_riemann(g, 0, Activation::tanh_act(), eps), ConfigError);
}

TEST_CASE("a shared dictionary serves several targets with one factorization") {
    const RidgeProfile g = standard_profile();
    const std::vector<double> kinks{-2.0, -1.0, 0.0, 1.0, 2.0};
    const SharedSynth shared(Activation::tanh_act(), kinks, -2.0, 2.0, 6);
    const PwLinear other = PwLinear::hat(1.0) * 0.8 + PwLinear::hat(2.0) * -0.3;
    for (const PwLinear* target : {&g.g, &other}) {
        const Expansion e = shared.fit(*target, 0.01);
        CHECK(e.error_bound <= 0.01);
        const double scanned = dense_scan(e.net, *target, -9.0, 9.0);
        CHECK(scanned <= e.cert.total + 1e-12);
    }
    CHECK_THROWS_AS(shared.fit(g.g, 1e-9), TargetNotMet);
}

}  // TEST_SUITE
