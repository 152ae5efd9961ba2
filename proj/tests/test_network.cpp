#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "uniapprox/activation.hpp"
#include "uniapprox/errors.hpp"
#include "uniapprox/network.hpp"

using namespace uniapprox;

namespace {

Network ridge_pair_net() {
    // two tanh ridges over R^2
    std::vector<Unit> units;
    units.push_back(Unit{{1.0, 0.5}, 0.25});
    units.push_back(Unit{{-0.3, 2.0}, -1.0});
    return Network::one_layer(2, units, Activation::tanh_act(),
                              {0.7, -1.3}, 0.1);
}

}  // namespace

TEST_SUITE("network") {

TEST_CASE("one layer evaluation matches the direct formula") {
    const auto net = ridge_pair_net();
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 200; ++i) {
        const double x = u(rng), y = u(rng);
        const double want = 0.7 * std::tanh(x + 0.5 * y + 0.25) -
                            1.3 * std::tanh(-0.3 * x + 2.0 * y - 1.0) + 0.1;
        CHECK(net(x, y) == doctest::Approx(want).epsilon(1e-14));
    }
}

TEST_CASE("relu second difference realized as a three unit net") {
    // chi(x) = relu(x-2) - 2 relu(x-1) + relu(x): exact unit hat on [0,2]
    std::vector<Unit> units{Unit{{1.0}, -2.0}, Unit{{1.0}, -1.0}, Unit{{1.0}, 0.0}};
    const auto net = Network::one_layer(1, units, Activation::relu(),
                                        {1.0, -2.0, 1.0}, 0.0);
    const auto chi = second_difference(Activation::relu());
    for (int i = 0; i <= 1000; ++i) {
        const double x = -1.0 + 4.0 * i / 1000.0;
        const double a = net(std::vector<double>{x});
        const double b = chi(x);
        CHECK(std::abs(a - b) <= 4.0 * std::ldexp(1.0, -52) * std::max(1.0, std::abs(b)));
    }
}

TEST_CASE("constructor validates shapes") {
    std::vector<Unit> units{Unit{{1.0, 2.0}, 0.0}};
    CHECK_THROWS_AS(Network::one_layer(3, units, Activation::relu(), {1.0}, 0.0),
                    DimensionMismatch);
    CHECK_THROWS_AS(Network::one_layer(2, units, Activation::relu(), {1.0, 2.0}, 0.0),
                    DimensionMismatch);
    const auto net = ridge_pair_net();
    CHECK_THROWS_AS(net(std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("affine precompose agrees pointwise") {
    const auto net = ridge_pair_net();
    // x = A z + b with A 2x3
    const std::vector<std::vector<double>> A{{1.0, 0.0, 2.0}, {0.5, -1.0, 0.0}};
    const std::vector<double> b{0.1, -0.2};
    const auto pre = affine_precompose(net, A, b);
    CHECK(pre.input_dim() == 3);
    CHECK(pre.unit_count() == net.unit_count());
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int i = 0; i < 200; ++i) {
        const std::vector<double> z{u(rng), u(rng), u(rng)};
        const std::vector<double> x{
            A[0][0] * z[0] + A[0][1] * z[1] + A[0][2] * z[2] + b[0],
            A[1][0] * z[0] + A[1][1] * z[1] + A[1][2] * z[2] + b[1]};
        CHECK(pre(z) == doctest::Approx(net(x)).epsilon(1e-13));
    }
    CHECK_THROWS_AS(affine_precompose(net, {{1.0, 0.0}}, {0.0}), DimensionMismatch);
}

TEST_CASE("affine precompose with identity changes nothing") {
    const auto net = ridge_pair_net();
    const auto pre = affine_precompose(net, {{1.0, 0.0}, {0.0, 1.0}}, {0.0, 0.0});
    for (double x : {-1.5, 0.0, 2.25})
        for (double y : {-0.75, 0.5})
            CHECK(pre(x, y) == net(x, y));
}

TEST_CASE("insert hidden replaces the activation exactly") {
    const auto outer = ridge_pair_net();
    // inner approximates identity trivially: single unit a=1, b=0, coeff 1
    const auto inner = Network::one_layer(
        1, {Unit{{1.0}, 0.0}}, Activation::tanh_act(), {1.0}, 0.0);
    const auto merged = insert_hidden(outer, inner);
    CHECK(merged.depth() == outer.depth());
    CHECK(merged.unit_count() == outer.unit_count() * inner.unit_count());
    for (double x : {-2.0, -0.3, 0.0, 1.7})
        for (double y : {-1.0, 0.4, 2.2})
            CHECK(merged(x, y) == doctest::Approx(outer(x, y)).epsilon(1e-14));
}

TEST_CASE("insert hidden composes a nontrivial inner expansion") {
    // outer: one relu ridge; inner: 2-unit relu net computing relu(2t-1)+relu(-t)
    const auto outer = Network::one_layer(
        2, {Unit{{1.0, -1.0}, 0.5}}, Activation::relu(), {2.0}, -0.25);
    const auto inner = Network::one_layer(
        1, {Unit{{2.0}, -1.0}, Unit{{-1.0}, 0.0}}, Activation::relu(),
        {1.0, 1.0}, 0.125);
    const auto merged = insert_hidden(outer, inner);
    CHECK(merged.unit_count() == 2);
    for (double x : {-1.0, 0.0, 0.6, 3.0}) {
        for (double y : {-2.0, 0.9}) {
            const double t = x - y + 0.5;
            const double inner_t = std::max(2.0 * t - 1.0, 0.0) +
                                   std::max(-t, 0.0) + 0.125;
            const double want = 2.0 * inner_t - 0.25;
            CHECK(merged(x, y) == doctest::Approx(want).epsilon(1e-14));
        }
    }
    // inner must be scalar-in scalar-out one-layer
    CHECK_THROWS_AS(insert_hidden(outer, ridge_pair_net()), IncompatibleNetworks);
}

TEST_CASE("linear combine sums pointwise and respects cancellation") {
    const auto net = ridge_pair_net();
    std::vector<Unit> units2{Unit{{0.2, -0.4}, 0.0}};
    const auto other = Network::one_layer(2, units2, Activation::tanh_act(),
                                          {3.0}, -0.5);
    const auto combo = linear_combine({{net, 2.0}, {other, -1.0}});
    CHECK(combo.unit_count() == net.unit_count() + other.unit_count());
    for (double x : {-1.2, 0.0, 0.8})
        for (double y : {-0.6, 1.4})
            CHECK(combo(x, y) ==
                  doctest::Approx(2.0 * net(x, y) - other(x, y)).epsilon(1e-13));

    const auto cancel = linear_combine({{net, 1.0}, {net, -1.0}});
    for (double x : {-2.0, 0.3, 1.1})
        CHECK(cancel(x, 0.5) == doctest::Approx(0.0));

    // mismatched activations refuse to merge
    std::vector<Unit> units3{Unit{{1.0, 0.0}, 0.0}};
    const auto relu_net = Network::one_layer(2, units3, Activation::relu(),
                                             {1.0}, 0.0);
    CHECK_THROWS_AS(linear_combine({{net, 1.0}, {relu_net, 1.0}}),
                    IncompatibleNetworks);
    CHECK_THROWS_AS(linear_combine({}), DegenerateData);
}

TEST_CASE("dedup merges identical units and drops dead ones") {
    std::vector<Unit> units{Unit{{1.0, 0.0}, 0.5}, Unit{{1.0, 0.0}, 0.5},
                            Unit{{0.0, 1.0}, 0.0}};
    const auto net = Network::one_layer(2, units, Activation::tanh_act(),
                                        {0.25, 0.75, -2.0}, 1.0);
    const auto slim = dedup_last_layer(net);
    CHECK(slim.unit_count() == 2);
    for (double x : {-1.0, 0.2, 2.0})
        for (double y : {-0.5, 1.5})
            CHECK(slim(x, y) == doctest::Approx(net(x, y)).epsilon(1e-15));

    const auto dead = Network::one_layer(2, units, Activation::tanh_act(),
                                         {1.0, -1.0, 0.0}, 0.5);
    const auto gone = dedup_last_layer(dead);
    CHECK(gone.unit_count() == 1);
    for (double x : {-1.0, 0.2})
        CHECK(gone(x, 0.1) == doctest::Approx(0.5));
}

TEST_CASE("json serialization round trips builtin and custom activations") {
    const auto net = ridge_pair_net();
    const auto text = serialize(net);
    const auto back = deserialize(text);
    CHECK(back.input_dim() == net.input_dim());
    CHECK(back.unit_count() == net.unit_count());
    for (double x : {-1.7, 0.0, 0.9})
        for (double y : {-0.2, 1.1})
            CHECK(back(x, y) == net(x, y));

    const auto pl = Activation::from_pwlinear(
        "bump", PwLinear({-1.0, 0.0, 1.0}, {0.0, 2.0, 0.0}, 0.0, 0.0));
    const auto plnet = Network::one_layer(1, {Unit{{1.5}, -0.5}}, pl, {2.0}, 0.0);
    const auto plback = deserialize(serialize(plnet));
    for (double x : {-2.0, -0.1, 0.4, 1.3})
        CHECK(plback(std::vector<double>{x}) ==
              plnet(std::vector<double>{x}));

    CHECK_THROWS_AS(deserialize("{\"input_dim\": 1}"), ConfigError);
}

}  // TEST_SUITE
