#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "uniapprox/errors.hpp"

namespace uniapprox {

// Piecewise-linear function on the whole line: sorted knots (x_i, y_i),
// linear interpolation between them, and constant slopes beyond the first
// and last knot.  Value semantics; all algebra is exact (no resampling).
class PwLinear {
  public:
    PwLinear() : xs_{0.0}, ys_{0.0} {}

    PwLinear(std::vector<double> xs, std::vector<double> ys,
             double left_slope = 0.0, double right_slope = 0.0)
        : xs_(std::move(xs)), ys_(std::move(ys)),
          left_slope_(left_slope), right_slope_(right_slope) {
        if (xs_.empty() || xs_.size() != ys_.size())
            throw DegenerateData("PwLinear: empty or mismatched knot lists");
        for (std::size_t i = 1; i < xs_.size(); ++i)
            if (!(xs_[i] > xs_[i - 1]))
                throw DegenerateData("PwLinear: knots must be strictly increasing");
    }

    static PwLinear constant(double c) {
        return PwLinear({0.0}, {c}, 0.0, 0.0);
    }
    // Triangular hat of height 1 on [-s, s].
    static PwLinear hat(double s) {
        assert(s > 0.0);
        return PwLinear({-s, 0.0, s}, {0.0, 1.0, 0.0});
    }
    static PwLinear relu() { return PwLinear({0.0}, {0.0}, 0.0, 1.0); }
    // v1: 0 below 0, x on [0,1], 1 above (the unit ramp).
    static PwLinear unit_ramp() { return PwLinear({0.0, 1.0}, {0.0, 1.0}); }

    double operator()(double x) const {
        if (x <= xs_.front())
            return ys_.front() + left_slope_ * (x - xs_.front());
        if (x >= xs_.back())
            return ys_.back() + right_slope_ * (x - xs_.back());
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs_.begin()) - 1;
        const double t = (x - xs_[i]) / (xs_[i + 1] - xs_[i]);
        return ys_[i] + t * (ys_[i + 1] - ys_[i]);
    }

    const std::vector<double>& knots_x() const { return xs_; }
    const std::vector<double>& knots_y() const { return ys_; }
    double left_slope() const { return left_slope_; }
    double right_slope() const { return right_slope_; }

    // x ↦ f(x - dx)
    PwLinear shifted(double dx) const {
        PwLinear r(*this);
        for (double& x : r.xs_) x += dx;
        return r;
    }

    // x ↦ f(a·x + b), a ≠ 0.
    PwLinear affine_arg(double a, double b) const {
        if (a == 0.0) throw DegenerateData("PwLinear::affine_arg: a must be nonzero");
        PwLinear r;
        const std::size_t n = xs_.size();
        r.xs_.resize(n);
        r.ys_.resize(n);
        if (a > 0.0) {
            for (std::size_t i = 0; i < n; ++i) {
                r.xs_[i] = (xs_[i] - b) / a;
                r.ys_[i] = ys_[i];
            }
            r.left_slope_ = left_slope_ * a;
            r.right_slope_ = right_slope_ * a;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                r.xs_[i] = (xs_[n - 1 - i] - b) / a;
                r.ys_[i] = ys_[n - 1 - i];
            }
            r.left_slope_ = right_slope_ * a;
            r.right_slope_ = left_slope_ * a;
        }
        return r;
    }

    PwLinear operator*(double c) const {
        PwLinear r(*this);
        for (double& y : r.ys_) y *= c;
        r.left_slope_ *= c;
        r.right_slope_ *= c;
        return r;
    }

    friend PwLinear operator+(const PwLinear& f, const PwLinear& g) {
        // Merge knot sets; slopes add.
        std::vector<double> xs;
        xs.reserve(f.xs_.size() + g.xs_.size());
        std::merge(f.xs_.begin(), f.xs_.end(), g.xs_.begin(), g.xs_.end(),
                   std::back_inserter(xs));
        xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
        std::vector<double> ys(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = f(xs[i]) + g(xs[i]);
        return PwLinear(std::move(xs), std::move(ys),
                        f.left_slope_ + g.left_slope_,
                        f.right_slope_ + g.right_slope_);
    }
    friend PwLinear operator-(const PwLinear& f, const PwLinear& g) {
        return f + g * (-1.0);
    }

    double max_abs_slope() const {
        double m = std::max(std::abs(left_slope_), std::abs(right_slope_));
        for (std::size_t i = 1; i < xs_.size(); ++i)
            m = std::max(m, std::abs((ys_[i] - ys_[i - 1]) / (xs_[i] - xs_[i - 1])));
        return m;
    }

    bool compact_support() const {
        return left_slope_ == 0.0 && right_slope_ == 0.0 &&
               ys_.front() == 0.0 && ys_.back() == 0.0;
    }
    double support_lo() const { return xs_.front(); }
    double support_hi() const { return xs_.back(); }

    // ∫ f du over ℝ (requires compact support).
    double integral() const {
        if (!compact_support())
            throw DegenerateData("PwLinear::integral: support not compact");
        double s = 0.0;
        for (std::size_t i = 1; i < xs_.size(); ++i)
            s += 0.5 * (ys_[i] + ys_[i - 1]) * (xs_[i] - xs_[i - 1]);
        return s;
    }

    // ∫ f(u) u² du over ℝ (requires compact support).  Exact per piece:
    // with f = α + βu on [x0,x1], ∫ f u² = α(x1³−x0³)/3 + β(x1⁴−x0⁴)/4.
    double moment2() const {
        if (!compact_support())
            throw DegenerateData("PwLinear::moment2: support not compact");
        double s = 0.0;
        for (std::size_t i = 1; i < xs_.size(); ++i) {
            const double x0 = xs_[i - 1], x1 = xs_[i];
            const double beta = (ys_[i] - ys_[i - 1]) / (x1 - x0);
            const double alpha = ys_[i - 1] - beta * x0;
            s += alpha * (x1 * x1 * x1 - x0 * x0 * x0) / 3.0 +
                 beta * (x1 * x1 * x1 * x1 - x0 * x0 * x0 * x0) / 4.0;
        }
        return s;
    }

    double max_value() const {
        double m = ys_.front();
        for (double y : ys_) m = std::max(m, y);
        return m;
    }
    double min_value() const {
        double m = ys_.front();
        for (double y : ys_) m = std::min(m, y);
        return m;
    }
    // sup of |f| over ℝ; infinite support sides must be flat or the sup is unbounded.
    double sup_abs() const {
        double m = std::max(std::abs(max_value()), std::abs(min_value()));
        if (left_slope_ != 0.0 || right_slope_ != 0.0)
            throw DegenerateData("PwLinear::sup_abs: unbounded function");
        return m;
    }

    // max of |f| over the interval [lo, hi] — endpoint values plus interior knots.
    double range_abs_max(double lo, double hi) const {
        if (lo > hi) std::swap(lo, hi);
        double m = std::max(std::abs((*this)(lo)), std::abs((*this)(hi)));
        const auto b = std::lower_bound(xs_.begin(), xs_.end(), lo);
        const auto e = std::upper_bound(xs_.begin(), xs_.end(), hi);
        for (auto it = b; it != e; ++it)
            m = std::max(m, std::abs(ys_[static_cast<std::size_t>(it - xs_.begin())]));
        return m;
    }

    // Exact [min, max] over the interval (extrema sit at endpoints or knots).
    std::pair<double, double> range_minmax(double lo, double hi) const {
        if (lo > hi) std::swap(lo, hi);
        double vlo = (*this)(lo), vhi = (*this)(hi);
        if (vlo > vhi) std::swap(vlo, vhi);
        const auto b = std::lower_bound(xs_.begin(), xs_.end(), lo);
        const auto e = std::upper_bound(xs_.begin(), xs_.end(), hi);
        for (auto it = b; it != e; ++it) {
            const double y = ys_[static_cast<std::size_t>(it - xs_.begin())];
            vlo = std::min(vlo, y);
            vhi = std::max(vhi, y);
        }
        return {vlo, vhi};
    }

  private:
    std::vector<double> xs_, ys_;
    double left_slope_ = 0.0, right_slope_ = 0.0;
};

}  // namespace uniapprox
