#include "doctest.h"

#include <cmath>
#include <random>

#include "uniapprox/pwlinear.hpp"

using uniapprox::PwLinear;

TEST_SUITE("pwlinear") {

TEST_CASE("hat evaluation and knots") {
    const auto h = PwLinear::hat(1.0);
    CHECK(h(0.0) == 1.0);
    CHECK(h(-1.0) == 0.0);
    CHECK(h(1.0) == 0.0);
    CHECK(h(0.5) == doctest::Approx(0.5));
    CHECK(h(2.0) == 0.0);
    CHECK(h(-3.0) == 0.0);
}

TEST_CASE("relu and unit ramp") {
    const auto r = PwLinear::relu();
    CHECK(r(-5.0) == 0.0);
    CHECK(r(3.25) == 3.25);
    const auto v = PwLinear::unit_ramp();
    CHECK(v(-0.1) == 0.0);
    CHECK(v(0.4) == doctest::Approx(0.4));
    CHECK(v(7.0) == 1.0);
}

TEST_CASE("algebra matches pointwise reference") {
    const auto a = PwLinear::hat(1.0);
    const auto b = PwLinear::hat(2.0).shifted(0.5) * 0.7;
    const auto s = a + b;
    const auto d = a - b;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng);
        CHECK(s(x) == doctest::Approx(a(x) + b(x)).epsilon(1e-14));
        CHECK(d(x) == doctest::Approx(a(x) - b(x)).epsilon(1e-14));
    }
}

TEST_CASE("affine_arg reparametrizes exactly, including reversal") {
    const auto h = PwLinear::hat(1.0);
    const auto g = h.affine_arg(-2.0, 0.5);  // x ↦ h(-2x + 0.5)
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng);
        CHECK(g(x) == doctest::Approx(h(-2.0 * x + 0.5)).epsilon(1e-14));
    }
    // slopes transform: relu(-(x)) has left slope -1
    const auto rr = PwLinear::relu().affine_arg(-1.0, 0.0);
    CHECK(rr(-2.0) == 2.0);
    CHECK(rr(2.0) == 0.0);
}

TEST_CASE("integral and moment2 closed forms for hats") {
    // ∫Λ_s = s, ∫Λ_s·u² = s³/6 — cross-checked by midpoint Riemann reference.
    for (const double s : {1.0, 2.0, 0.35}) {
        const auto h = PwLinear::hat(s);
        CHECK(h.integral() == doctest::Approx(s).epsilon(1e-14));
        CHECK(h.moment2() == doctest::Approx(s * s * s / 6.0).epsilon(1e-14));
        double ref0 = 0.0, ref2 = 0.0;
        const int n = 40000;
        const double step = 2.0 * s / n;
        for (int i = 0; i < n; ++i) {
            const double u = -s + (i + 0.5) * step;
            ref0 += h(u) * step;
            ref2 += h(u) * u * u * step;
        }
        CHECK(h.integral() == doctest::Approx(ref0).epsilon(1e-6));
        CHECK(h.moment2() == doctest::Approx(ref2).epsilon(1e-6));
    }
}

TEST_CASE("max_abs_slope is the Lipschitz constant") {
    const auto g = PwLinear::hat(1.0) - PwLinear::hat(2.0) * 0.5;
    // slopes: hat(1) contributes ∓1, hat(2)/2 contributes ∓1/4; on [0,1] the
    // difference is -1 - (-1/4) = -3/4, the steepest piece.
    CHECK(g.max_abs_slope() == doctest::Approx(0.75));
}

TEST_CASE("range_abs_max sees interior knots and endpoints") {
    const auto h = PwLinear::hat(1.0);
    CHECK(h.range_abs_max(-0.25, 0.25) == 1.0);     // peak knot inside
    CHECK(h.range_abs_max(0.5, 0.75) == doctest::Approx(0.5));  // endpoint
    CHECK(h.range_abs_max(3.0, 5.0) == 0.0);
}

TEST_CASE("invalid construction is rejected") {
    CHECK_THROWS_AS(PwLinear({1.0, 1.0}, {0.0, 0.0}), uniapprox::DegenerateData);
    CHECK_THROWS_AS(PwLinear({}, {}), uniapprox::DegenerateData);
    CHECK_THROWS_AS(PwLinear::relu().integral(), uniapprox::DegenerateData);
}

}  // TEST_SUITE
