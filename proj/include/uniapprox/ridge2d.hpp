#pragma once

#include <utility>
#include <vector>

#include "uniapprox/certify.hpp"
#include "uniapprox/network.hpp"
#include "uniapprox/profile.hpp"

namespace uniapprox {

// Rotational integral f(x,y) = ∫_0^{2π} g(R sinθ) dθ by adaptive quadrature
// with breakpoints at the profile knots pulled back through θ ↦ R sinθ;
// absolute tolerance 1e-10.
double target_f(const RidgeProfile& g, double x, double y);

// Same integral through the per-piece antiderivative
// ∫ (α+βu)/√(R²−u²) du = α asin(u/R) − β √(R²−u²): machine precision in
// O(#knots) flops. The certifiers and ψ run on this form.
double target_f_radial(const RidgeProfile& g, double R);

// f_N = (2π/N) Σ_k g(a_k·x) with a_k = (cos 2πk/N, sin 2πk/N): a one-layer
// network whose activation is the profile itself.
Network riemann_net(const RidgeProfile& g, int N);

// Φ_N(x,y): number of directions whose strip |a_k·x| ≤ a contains the point.
int support_hits(const RidgeProfile& g, int N, double x, double y);

// Radius beyond which Φ_{2^M} ≤ 2: a·sqrt(2/(1−cos(2π/2^M))).
double phi_two_radius(double a, int M);

// ψ(x) = ∫_ℝ f(x,y) dy to absolute tolerance 1e-8. Requires m0 = 0.
double psi(const RidgeProfile& g, double x);

// Least-squares slope of log|f| against log R over (R, |f|) samples.
double decay_exponent(const std::vector<std::pair<double, double>>& point_values);

// Conservative envelope |f(R)| ≤ C/(1+R^p) valid for R ≥ r0 > a, with p = 3
// when m0 = 0 and p = 1 otherwise; constants doubled for safety.
TailDescription f_tail(const RidgeProfile& g, double r0);

struct ConvergenceOptions {
    // fraction of the tail headroom spent on cell-width slack
    double slack_budget = 0.5;
    double min_dr = 5e-5;
    int threads = 0;
};

// Certified ‖f_{2^m} − f‖∞ over all of ℝ²: a Lipschitz grid on the inner
// wedge (dihedral symmetry cuts the plane to θ ∈ [0, π/N]), interval cells
// over the strip annulus, and the strip-count + radial tail beyond.
SupNormCertificate riemann_convergence_error(const RidgeProfile& g, int m,
                                             const ConvergenceOptions& opt = {});

}  // namespace uniapprox
