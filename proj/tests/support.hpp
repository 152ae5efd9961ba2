#pragma once

// Shared helpers for the unit and acceptance suites: a deterministic
// quasi-random sampler and a family of randomly generated fields whose sup
// norms and tail envelopes are known rigorously, used to audit certificates.

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <vector>

#include "uniapprox/certify.hpp"
#include "uniapprox/pwlinear.hpp"

namespace testsupport {

// Additive-recurrence (R_d) low-discrepancy sequence on [0,1)^d.
class QuasiGrid {
  public:
    explicit QuasiGrid(int dim) : dim_(dim), state_(dim, 0.5) {
        // plastic-constant generalization
        double g = 1.0;
        for (int it = 0; it < 64; ++it)
            g = std::pow(1.0 + g, 1.0 / (dim + 1));
        alpha_.resize(dim);
        double a = 1.0 / g;
        for (int d = 0; d < dim; ++d) {
            alpha_[d] = a;
            a /= g;
        }
    }

    const std::vector<double>& next() {
        for (int d = 0; d < dim_; ++d) {
            state_[d] += alpha_[d];
            if (state_[d] >= 1.0) state_[d] -= 1.0;
        }
        return state_;
    }

  private:
    int dim_;
    std::vector<double> alpha_;
    std::vector<double> state_;
};

// A randomly constructed field together with everything needed to certify it
// honestly: a valid Lipschitz bound and a valid tail envelope.
struct AuditField {
    uniapprox::FieldFn f;
    int dim = 1;
    double lipschitz = 0.0;
    uniapprox::TailDescription tail;
    double r = 0.0;
    double h = 0.0;
    double sample_radius = 0.0;  // where to throw audit samples
};

// Compactly supported piecewise-linear tensor field: product of random hat
// combinations per axis. Outside the support box the field is exactly zero,
// so any tail envelope is valid.
inline AuditField random_pl_field(std::mt19937& rng, int dim) {
    using uniapprox::PwLinear;
    std::uniform_real_distribution<double> uc(-2.0, 2.0);
    std::uniform_int_distribution<int> nk(2, 5);
    auto axis_profiles = std::make_shared<std::vector<PwLinear>>();
    double extent = 0.0;
    for (int d = 0; d < dim; ++d) {
        PwLinear p;
        const int k = nk(rng);
        for (int j = 0; j < k; ++j)
            p = p + PwLinear::hat(1.0).shifted(uc(rng)) * uc(rng);
        axis_profiles->push_back(p);
        extent = std::max({extent, std::abs(p.support_lo()),
                           std::abs(p.support_hi())});
    }
    // Lipschitz of a tensor product: sum over axes of (axis slope) times the
    // sup of the other factors.
    double lip_total = 0.0;
    for (int d = 0; d < dim; ++d) {
        double other = 1.0;
        for (int e = 0; e < dim; ++e)
            if (e != d) other *= (*axis_profiles)[e].sup_abs();
        lip_total += (*axis_profiles)[d].max_abs_slope() * other;
    }
    AuditField a;
    a.dim = dim;
    a.f = [axis_profiles](const double* x, std::size_t n) {
        double v = 1.0;
        for (std::size_t d = 0; d < n; ++d) v *= (*axis_profiles)[d](x[d]);
        return v;
    };
    a.lipschitz = lip_total;
    a.r = extent * std::sqrt(double(dim)) + 1.0;
    a.tail = uniapprox::TailDescription{0.0, 3.0, a.r};
    a.h = 0.05;
    a.sample_radius = a.r + 3.0;
    return a;
}

// Cancelling tanh combination: sum of c_j tanh((x - z_j)/s_j) with sum c_j =
// 0, so both ray limits vanish. Since 1 -+ tanh(u) <= 2 e^{-+2u}, beyond the
// centers |f(x)| <= 2 sum|c_j| e^{-2(|x|-z_max)/s_max}; for s <= 2 the
// product with (1+x^2) is decreasing, giving a valid quadratic tail with
// C = (1 + r0^2) * 2 sum|c_j| e^{-2(r0 - z_max)/s_max} at r0 = inner radius.
inline AuditField random_tanh_field(std::mt19937& rng) {
    std::uniform_real_distribution<double> uz(-3.0, 3.0);
    std::uniform_real_distribution<double> uc(0.2, 1.5);
    std::uniform_real_distribution<double> us(0.3, 1.8);
    const int k = 3;
    auto zs = std::make_shared<std::vector<double>>();
    auto cs = std::make_shared<std::vector<double>>();
    auto ss = std::make_shared<std::vector<double>>();
    double csum = 0.0, cabs = 0.0, zmax = 0.0, smax = 0.0;
    for (int j = 0; j < k; ++j) {
        zs->push_back(uz(rng));
        ss->push_back(us(rng));
        const double c = (j + 1 < k) ? (uc(rng) * (j % 2 ? -1.0 : 1.0)) : -csum;
        cs->push_back(c);
        csum += c;
    }
    for (int j = 0; j < k; ++j) {
        cabs += std::abs((*cs)[j]);
        zmax = std::max(zmax, std::abs((*zs)[j]));
        smax = std::max(smax, (*ss)[j]);
    }
    AuditField a;
    a.dim = 1;
    a.f = [zs, cs, ss](const double* x, std::size_t) {
        double v = 0.0;
        for (std::size_t j = 0; j < zs->size(); ++j)
            v += (*cs)[j] * std::tanh((x[0] - (*zs)[j]) / (*ss)[j]);
        return v;
    };
    double lip = 0.0;
    for (int j = 0; j < k; ++j) lip += std::abs((*cs)[j]) / (*ss)[j];
    a.lipschitz = lip;
    const double r0 = zmax + 4.0;
    a.r = r0 + 2.0;
    a.tail = uniapprox::TailDescription{
        (1.0 + r0 * r0) * 2.0 * cabs * std::exp(-2.0 * (r0 - zmax) / smax),
        2.0, r0};
    a.h = 0.01;
    a.sample_radius = a.r + 40.0;
    return a;
}

// Audits one field: quasi-random samples inside and outside B_r must never
// exceed the certificate total.
inline double audit_sample_max(const AuditField& a, std::size_t samples) {
    QuasiGrid q(a.dim);
    double m = 0.0;
    std::vector<double> x(a.dim);
    for (std::size_t i = 0; i < samples; ++i) {
        const auto& u = q.next();
        for (int d = 0; d < a.dim; ++d)
            x[d] = (2.0 * u[d] - 1.0) * a.sample_radius;
        m = std::max(m, std::abs(a.f(x.data(), a.dim)));
    }
    return m;
}

}  // namespace testsupport
