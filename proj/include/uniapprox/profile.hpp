#pragma once

#include "uniapprox/pwlinear.hpp"

namespace uniapprox {

// Compactly supported Lipschitz ridge profile together with the moments that
// drive the decay laws of its rotational integral.
struct RidgeProfile {
    PwLinear g;
    double support_radius = 0.0;  // a: g vanishes outside [-a, a]
    double lipschitz = 0.0;       // c
    double m0 = 0.0;              // ∫ g
    double m2 = 0.0;              // ∫ g u^2
    double sup = 0.0;             // sup |g|
    double m2abs = 0.0;           // ∫ |g| u^2, for conservative tail constants

    double operator()(double u) const { return g(u); }
};

// Computes all derived fields; throws DegenerateActivation if g is not
// compactly supported.
RidgeProfile make_profile(const PwLinear& g);

// The double hat Λ_1 − ½Λ_2: zero mean, second moment −1/2, support radius 2.
RidgeProfile standard_profile();

// Single triangular hat Λ_s of height 1 on [−s, s] (nonzero mean branch).
RidgeProfile hat_profile(double s = 1.0);

}  // namespace uniapprox
