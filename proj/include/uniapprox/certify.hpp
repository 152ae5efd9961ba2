#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace uniapprox {

// Analytic decay envelope |f(x)| <= C / (1 + |x|^exponent) valid for
// |x| >= inner_radius.
struct TailDescription {
    double C = 0.0;
    double exponent = 0.0;
    double inner_radius = 0.0;

    double bound_at(double r) const {
        return C / (1.0 + std::pow(r, exponent));
    }
};

// Certified enclosure of sup over all of R^n of |f|:
// a grid bound on the ball B_r plus Lipschitz slack, compared against the
// analytic tail outside.
struct SupNormCertificate {
    double grid_max = 0.0;
    double lipschitz_slack = 0.0;
    double tail_bound = 0.0;
    double total = 0.0;
    double domain_radius = 0.0;
    double grid_step = 0.0;

    std::string to_json() const;
};

using FieldFn = std::function<double(const double*, std::size_t)>;

SupNormCertificate sup_norm(const FieldFn& f_diff, int dim,
                            double lipschitz_bound, const TailDescription& tail,
                            double r, double h, int threads = 0);

SupNormCertificate sup_norm1(const std::function<double(double)>& f, double L,
                             const TailDescription& tail, double r, double h,
                             int threads = 0);
SupNormCertificate sup_norm2(const std::function<double(double, double)>& f,
                             double L, const TailDescription& tail, double r,
                             double h, int threads = 0);

// Halves h until the Lipschitz slack drops below slack_frac of the grid max
// (or the point budget runs out).
SupNormCertificate sup_norm_auto(const FieldFn& f_diff, int dim,
                                 double lipschitz_bound,
                                 const TailDescription& tail, double r,
                                 double h0, double slack_frac = 0.1,
                                 std::size_t max_points = 80000000,
                                 int threads = 0);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // max absolute deviation
};

// Ordinary least squares through (log R, log value) pairs.
SlopeFit slope_fit(const std::vector<std::pair<double, double>>& log_points);

}  // namespace uniapprox
