#include "uniapprox/certify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>

#include "json.hpp"
#include "uniapprox/errors.hpp"
#include "uniapprox/parallel.hpp"

namespace uniapprox {

std::string SupNormCertificate::to_json() const {
    nlohmann::json j;
    j["grid_max"] = grid_max;
    j["slack"] = lipschitz_slack;
    j["tail"] = tail_bound;
    j["total"] = total;
    j["r"] = domain_radius;
    j["h"] = grid_step;
    return j.dump();
}

SupNormCertificate sup_norm(const FieldFn& f_diff, int dim,
                            double lipschitz_bound, const TailDescription& tail,
                            double r, double h, int threads) {
    if (dim < 1 || dim > 8)
        throw DimensionMismatch("sup_norm: dimension out of range");
    if (!(r > 0.0) || !(h > 0.0))
        throw ConfigError("sup_norm: r and h must be positive");
    if (tail.inner_radius > r)
        throw InvalidTail("sup_norm: tail inner radius exceeds domain radius");
    if (lipschitz_bound < 0.0)
        throw ConfigError("sup_norm: negative lipschitz bound");

    const std::size_t n = static_cast<std::size_t>(dim);
    const double slack = lipschitz_bound * h * std::sqrt(double(n)) / 2.0;
    // Lattice -r + k*h, k = 0..K, spans [-r, r]; every x in B_r is within
    // h*sqrt(n)/2 of a lattice point of norm <= r + h*sqrt(n)/2, so points up
    // to that inflated radius are kept to preserve the covering argument.
    const std::size_t K = static_cast<std::size_t>(std::ceil(2.0 * r / h));
    const double keep2 = [&] {
        const double rk = r + h * std::sqrt(double(n)) / 2.0;
        return rk * rk;
    }();

    const std::size_t rows = K + 1;
    const double gmax = parallel_max(
        rows,
        [&](std::size_t i0) {
            std::vector<double> x(n, -r);
            std::vector<std::size_t> idx(n, 0);
            x[0] = -r + double(i0) * h;
            idx[0] = K;  // freeze axis 0 for this row
            double m = 0.0;
            const double x0sq = x[0] * x[0];
            if (n == 1) {
                if (x0sq <= keep2) m = std::abs(f_diff(x.data(), 1));
                return m;
            }
            // odometer over axes 1..n-1
            for (;;) {
                double s2 = x0sq;
                for (std::size_t d = 1; d < n; ++d) s2 += x[d] * x[d];
                if (s2 <= keep2) m = std::max(m, std::abs(f_diff(x.data(), n)));
                std::size_t d = n - 1;
                for (;;) {
                    if (idx[d] < K) {
                        ++idx[d];
                        x[d] = -r + double(idx[d]) * h;
                        break;
                    }
                    idx[d] = 0;
                    x[d] = -r;
                    if (d == 1) return m;
                    --d;
                }
            }
        },
        threads);

    SupNormCertificate c;
    c.grid_max = gmax;
    c.lipschitz_slack = slack;
    c.tail_bound = tail.bound_at(r);
    c.total = std::max(c.grid_max + c.lipschitz_slack, c.tail_bound);
    c.domain_radius = r;
    c.grid_step = h;
    return c;
}

SupNormCertificate sup_norm1(const std::function<double(double)>& f, double L,
                             const TailDescription& tail, double r, double h,
                             int threads) {
    return sup_norm([&f](const double* x, std::size_t) { return f(x[0]); }, 1,
                    L, tail, r, h, threads);
}

SupNormCertificate sup_norm2(const std::function<double(double, double)>& f,
                             double L, const TailDescription& tail, double r,
                             double h, int threads) {
    return sup_norm(
        [&f](const double* x, std::size_t) { return f(x[0], x[1]); }, 2, L,
        tail, r, h, threads);
}

SupNormCertificate sup_norm_auto(const FieldFn& f_diff, int dim,
                                 double lipschitz_bound,
                                 const TailDescription& tail, double r,
                                 double h0, double slack_frac,
                                 std::size_t max_points, int threads) {
    double h = h0;
    SupNormCertificate best;
    for (int iter = 0;; ++iter) {
        best = sup_norm(f_diff, dim, lipschitz_bound, tail, r, h, threads);
        if (best.lipschitz_slack <= slack_frac * best.grid_max) break;
        if (best.grid_max == 0.0 && iter >= 2) break;  // nothing to resolve
        const double axis = std::ceil(2.0 * r / (h / 2.0)) + 1.0;
        if (std::pow(axis, dim) > double(max_points)) break;
        h /= 2.0;
    }
    return best;
}

SlopeFit slope_fit(const std::vector<std::pair<double, double>>& log_points) {
    if (log_points.size() < 4)
        throw DegenerateData("slope_fit: need at least 4 points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : log_points) {
        sx += x;
        sy += y;
    }
    const double n = double(log_points.size());
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : log_points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (sxx <= 0.0)
        throw DegenerateData("slope_fit: abscissae are all equal");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    for (const auto& [x, y] : log_points)
        fit.residual =
            std::max(fit.residual, std::abs(y - fit.slope * x - fit.intercept));
    return fit;
}

}  // namespace uniapprox
