#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "uniapprox/errors.hpp"

namespace uniapprox {

// Degree-d Chebyshev interpolant of f on [a,b] (nodes of the first kind),
// evaluated by Clenshaw recurrence.
class ChebFit {
  public:
    ChebFit(const std::function<double(double)>& f, double a, double b, int degree)
        : a_(a), b_(b), coef_(static_cast<std::size_t>(degree) + 1, 0.0) {
        if (!(b > a)) throw DegenerateData("ChebFit: empty interval");
        const int n = degree + 1;
        std::vector<double> fv(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double theta = M_PI * (k + 0.5) / n;
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * std::cos(theta);
            fv[static_cast<std::size_t>(k)] = f(x);
        }
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                s += fv[static_cast<std::size_t>(k)] *
                     std::cos(M_PI * j * (k + 0.5) / n);
            coef_[static_cast<std::size_t>(j)] = 2.0 * s / n;
        }
        coef_[0] *= 0.5;
    }

    double operator()(double x) const {
        const double t = (2.0 * x - a_ - b_) / (b_ - a_);
        double b1 = 0.0, b2 = 0.0;
        for (std::size_t j = coef_.size(); j-- > 1;) {
            const double tmp = 2.0 * t * b1 - b2 + coef_[j];
            b2 = b1;
            b1 = tmp;
        }
        return t * b1 - b2 + coef_[0];
    }

    const std::vector<double>& coefficients() const { return coef_; }
    double lo() const { return a_; }
    double hi() const { return b_; }

  private:
    double a_, b_;
    std::vector<double> coef_;
};

}  // namespace uniapprox
