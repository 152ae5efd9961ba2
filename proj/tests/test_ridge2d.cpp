#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "uniapprox/errors.hpp"
#include "uniapprox/profile.hpp"
#include "uniapprox/quadrature.hpp"
#include "uniapprox/ridge2d.hpp"

using namespace uniapprox;

namespace {
constexpr double kPi = std::numbers::pi_v<double>;

// independent moment oracle: plain quadrature against the profile evaluator
double moment_oracle(const RidgeProfile& p, int power) {
    QuadratureOptions opt;
    opt.abs_tol = 1e-12;
    return integrate(
        [&](double u) { return p(u) * std::pow(u, power); },
        -p.support_radius, p.support_radius, p.g.knots_x(), opt);
}
}  // namespace

TEST_SUITE("ridge2d") {

TEST_CASE("standard profile has the advertised shape and moments") {
    const auto p = standard_profile();
    CHECK(p(0.0) == doctest::Approx(0.5));
    CHECK(p(1.0) == doctest::Approx(-0.25));
    CHECK(p(2.1) == 0.0);
    CHECK(p(-2.1) == 0.0);
    CHECK(p.support_radius == doctest::Approx(2.0));
    CHECK(p.m0 == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(p.m2 == doctest::Approx(-0.5));
    CHECK(moment_oracle(p, 0) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(moment_oracle(p, 2) == doctest::Approx(-0.5).epsilon(1e-10));
    CHECK(p.lipschitz == doctest::Approx(0.75));
    // |g| u^2 moment feeds the tail constants; oracle via split quadrature
    QuadratureOptions opt;
    opt.abs_tol = 1e-12;
    const double m2abs_oracle = integrate(
        [&](double u) { return std::abs(p(u)) * u * u; }, -2.0, 2.0,
        {-2.0, -1.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, 1.0, 2.0}, opt);
    CHECK(p.m2abs == doctest::Approx(m2abs_oracle).epsilon(1e-10));

    const auto hat = hat_profile();
    CHECK(hat.m0 == doctest::Approx(1.0));
    CHECK(hat.m2 == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("target f at the origin and far away") {
    const auto p = standard_profile();
    CHECK(target_f(p, 0.0, 0.0) == doctest::Approx(kPi));
    CHECK(std::abs(target_f(p, 1e6, 0.0)) < 1e-9);
    CHECK(target_f(p, 3.0, 4.0) == doctest::Approx(target_f(p, 5.0, 0.0)).epsilon(1e-9));
}

TEST_CASE("target f is rotation invariant") {
    const auto p = standard_profile();
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> ur(0.1, 8.0), ua(0.0, 2.0 * kPi);
    for (int i = 0; i < 20; ++i) {
        const double R = ur(rng), t1 = ua(rng), t2 = ua(rng);
        const double f1 = target_f(p, R * std::cos(t1), R * std::sin(t1));
        const double f2 = target_f(p, R * std::cos(t2), R * std::sin(t2));
        CHECK(f1 == doctest::Approx(f2).epsilon(1e-9));
    }
}

TEST_CASE("closed form matches the quadrature definition") {
    for (const auto& p : {standard_profile(), hat_profile()}) {
        for (double R : {0.0, 0.05, 0.5, 0.99, 1.0, 1.5, 1.999, 2.0, 2.3,
                         5.0, 20.0, 300.0}) {
            const double fq = target_f(p, R, 0.0);
            const double fc = target_f_radial(p, R);
            CHECK(std::abs(fq - fc) < 2e-10);
        }
    }
}

TEST_CASE("riemann net matches the sum and its symmetry") {
    const auto p = standard_profile();
    const auto net1 = riemann_net(p, 1);
    CHECK(net1(0.0, 0.0) == doctest::Approx(2.0 * kPi * p(0.0)));
    const int N = 16;
    const auto net = riemann_net(p, N);
    CHECK(net.unit_count() == N);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-6.0, 6.0);
    const double rot = 2.0 * kPi / N;
    for (int i = 0; i < 50; ++i) {
        const double x = u(rng), y = u(rng);
        const double xr = x * std::cos(rot) - y * std::sin(rot);
        const double yr = x * std::sin(rot) + y * std::cos(rot);
        CHECK(net(x, y) == doctest::Approx(net(xr, yr)).epsilon(1e-11));
        // direct sum oracle
        double s = 0.0;
        for (int k = 0; k < N; ++k) {
            const double th = 2.0 * kPi * k / N;
            s += p(std::cos(th) * x + std::sin(th) * y);
        }
        s *= 2.0 * kPi / N;
        CHECK(net(x, y) == doctest::Approx(s).epsilon(1e-12));
    }
    CHECK_THROWS_AS(riemann_net(p, 0), ConfigError);
}

TEST_CASE("support hits: origin, far criterion, dyadic recursion") {
    const auto p = standard_profile();
    CHECK(support_hits(p, 16, 0.0, 0.0) == 16);
    CHECK(support_hits(p, 7, 0.1, -0.1) == 7);

    const int M = 4;
    const double rphi = phi_two_radius(p.support_radius, M);
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> ur(1.01, 4.0);
    for (int i = 0; i < 200; ++i) {
        const double R = rphi * ur(rng), t = ua(rng);
        CHECK(support_hits(p, 1 << M, R * std::cos(t), R * std::sin(t)) <= 2);
    }

    // Φ_{2^{M+1}}(x) = Φ_{2^M}(x) + Φ_{2^M}(rotate(x, 2π/2^{M+1}))
    std::uniform_real_distribution<double> uc(-30.0, 30.0);
    for (int m = 2; m <= 8; ++m) {
        for (int i = 0; i < 40; ++i) {
            const double x = uc(rng), y = uc(rng);
            const double d = 2.0 * kPi / (1 << (m + 1));
            const double xr = x * std::cos(d) - y * std::sin(d);
            const double yr = x * std::sin(d) + y * std::cos(d);
            CHECK(support_hits(p, 1 << (m + 1), x, y) ==
                  support_hits(p, 1 << m, x, y) +
                      support_hits(p, 1 << m, xr, yr));
        }
    }
}

TEST_CASE("tail envelope dominates the function it describes") {
    for (const auto& p : {standard_profile(), hat_profile()}) {
        const double r0 = 2.0 * p.support_radius;
        const auto tail = f_tail(p, r0);
        for (int i = 0; i <= 400; ++i) {
            const double R = r0 * std::pow(1.02, i);
            CHECK(std::abs(target_f_radial(p, R)) <= tail.bound_at(R));
        }
        CHECK_THROWS_AS(f_tail(p, 0.5 * p.support_radius), InvalidTail);
    }
}

TEST_CASE("decay exponents match the moment structure") {
    const auto p = standard_profile();
    std::vector<std::pair<double, double>> pv;
    for (double R = 10.0; R <= 1000.0; R *= std::pow(100.0, 1.0 / 12.0))
        pv.emplace_back(R, std::abs(target_f_radial(p, R)));
    const double s = decay_exponent(pv);
    CHECK(s > -3.3);
    CHECK(s < -2.7);

    const auto hat = hat_profile();
    std::vector<std::pair<double, double>> ph;
    for (double R = 10.0; R <= 1000.0; R *= std::pow(100.0, 1.0 / 12.0))
        ph.emplace_back(R, std::abs(target_f_radial(hat, R)));
    const double sh = decay_exponent(ph);
    CHECK(sh > -1.2);
    CHECK(sh < -0.8);

    std::vector<std::pair<double, double>> flat{
        {10.0, 2.0}, {40.0, 2.0}, {200.0, 2.0}, {1500.0, 2.0}};
    CHECK(decay_exponent(flat) == doctest::Approx(0.0).epsilon(1e-12));

    CHECK_THROWS_AS(decay_exponent({{10.0, 1.0}, {20.0, 0.5}, {40.0, 0.2}}),
                    DegenerateData);
    std::vector<std::pair<double, double>> narrow{
        {10.0, 1.0}, {20.0, 0.5}, {40.0, 0.25}, {80.0, 0.12}};
    CHECK_THROWS_AS(decay_exponent(narrow), DegenerateData);
    std::vector<std::pair<double, double>> under{
        {10.0, 1.0}, {100.0, 0.5}, {1000.0, 0.0}, {10000.0, 0.1}};
    CHECK_THROWS_AS(decay_exponent(under), DegenerateData);
}

TEST_CASE("psi: oracle value, decay slope, nonvanishing, sign") {
    const auto p = standard_profile();

    // independent oracle at x = 10: composite Simpson over the quadrature
    // form of f, plus the certified tail remainder
    {
        const double x = 10.0, Y = 2000.0;
        const int n = 20000;
        const double h = Y / n;
        double s = target_f(p, x, 0.0) + target_f(p, x, Y);
        for (int i = 1; i < n; ++i)
            s += target_f(p, x, i * h) * (i % 2 ? 4.0 : 2.0);
        const double oracle = 2.0 * s * h / 3.0;
        const double tail_rem = f_tail(p, 4.0).C / Y;  // ≤ ∫ C/R³ beyond Y
        CHECK(std::abs(psi(p, x) - oracle) <= 1e-6 + tail_rem);
    }

    std::vector<std::pair<double, double>> pts;
    for (double x : {10.0, 20.0, 40.0, 80.0})
        pts.emplace_back(x, std::abs(psi(p, x)));
    // slope needs only 4 points here; spec's two-decade rule applies to f
    std::vector<std::pair<double, double>> logs;
    for (auto& [R, v] : pts) logs.emplace_back(std::log(R), std::log(v));
    const double slope = slope_fit(logs).slope;
    CHECK(slope > -2.4);
    CHECK(slope < -1.6);

    double m = 0.0;
    for (double x = 0.0; x <= 6.0; x += 0.5)
        m = std::max(m, std::abs(psi(p, x)));
    CHECK(m > 1e-4);

    // constant sign at large |x|, matching sign(m2) < 0
    for (double x : {50.0, -50.0, 100.0, -100.0}) CHECK(psi(p, x) < 0.0);

    CHECK_THROWS_AS(psi(hat_profile(), 1.0), ProfileNotZeroMean);
}

TEST_CASE("convergence certificates shrink and are sound") {
    const auto p = standard_profile();
    const auto e4 = riemann_convergence_error(p, 4);
    const auto e5 = riemann_convergence_error(p, 5);
    CHECK(e5.total < e4.total);

    // soundness: certified total dominates random sampling, including the
    // far strip poles where the error is largest
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ua(0.0, 2.0 * kPi);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    for (int m : {4, 5}) {
        const int N = 1 << m;
        const auto cert = riemann_convergence_error(p, m);
        const auto net = riemann_net(p, N);
        double worst = 0.0;
        for (int i = 0; i < 4000; ++i) {
            const double R = 60.0 * ur(rng) * ur(rng), t = ua(rng);
            const double x = R * std::cos(t), y = R * std::sin(t);
            worst = std::max(worst,
                             std::abs(net(x, y) - target_f_radial(p, R)));
        }
        // points riding a strip outward
        for (int i = 0; i < 200; ++i) {
            const double t = 2.0 * kPi * (i % N) / N + kPi / 2.0;
            const double R = 3.0 + i * 0.7;
            worst = std::max(worst, std::abs(net(R * std::cos(t), R * std::sin(t)) -
                                             target_f_radial(p, R)));
        }
        CHECK(cert.total >= worst);
        CHECK(cert.total <= 4.0 * worst);  // not absurdly loose either
    }
}

}  // TEST_SUITE
