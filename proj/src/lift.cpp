#include "uniapprox/lift.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <cstdio>
#include <chrono>
#include <cstdlib>
#include <sstream>
#include <utility>

#include "uniapprox/errors.hpp"
#include "uniapprox/parallel.hpp"
#include "uniapprox/pwlinear.hpp"
#include "uniapprox/synth1d.hpp"

namespace uniapprox {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double dot(const std::vector<double>& a, const double* v) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * v[i];
    return s;
}

}  // namespace

double TensorFactor::eval(const double* v) const {
    double prod = 1.0;
    if (inner.empty()) {
        for (std::size_t i = 0; i < profiles.size(); ++i) prod *= profiles[i].g(v[i]);
    } else {
        for (std::size_t i = 0; i < profiles.size(); ++i)
            prod *= profiles[i].g(dot(inner[i], v));
    }
    return prod;
}

double GridFactor::eval(const double* v) const {
    double y[3] = {0.0, 0.0, 0.0};
    if (inner.empty()) {
        for (int d = 0; d < dim; ++d) y[d] = v[d];
    } else {
        for (int d = 0; d < dim; ++d) y[d] = dot(inner[static_cast<std::size_t>(d)], v);
    }
    int idx[3] = {0, 0, 0};
    double fr[3] = {0.0, 0.0, 0.0};
    for (int d = 0; d < dim; ++d) {
        if (y[d] < lo[static_cast<std::size_t>(d)] || y[d] > hi[static_cast<std::size_t>(d)])
            return 0.0;
        const int cells = shape[static_cast<std::size_t>(d)] - 1;
        const double t = (y[d] - lo[static_cast<std::size_t>(d)]) /
                         (hi[static_cast<std::size_t>(d)] - lo[static_cast<std::size_t>(d)]) *
                         cells;
        int c = static_cast<int>(std::floor(t));
        c = std::clamp(c, 0, cells - 1);
        idx[d] = c;
        fr[d] = t - c;
    }
    // strides for the trailing coordinates of a row-major block
    std::size_t stride[3] = {1, 1, 1};
    for (int d = dim - 2; d >= 0; --d)
        stride[d] = stride[d + 1] * static_cast<std::size_t>(shape[static_cast<std::size_t>(d + 1)]);
    double acc = 0.0;
    const int corners = 1 << dim;
    for (int c = 0; c < corners; ++c) {
        double wt = 1.0;
        std::size_t off = 0;
        for (int d = 0; d < dim; ++d) {
            const int bit = (c >> d) & 1;
            wt *= bit ? fr[d] : 1.0 - fr[d];
            off += stride[d] * static_cast<std::size_t>(idx[d] + bit);
        }
        acc += wt * values[off];
    }
    return acc;
}

namespace {

int factor_dim_in(const PlacedFactor& pf) {
    return std::visit([](const auto& f) { return f.dim_in(); }, pf.factor);
}

double factor_eval(const PlacedFactor& pf, const double* y) {
    return std::visit([&](const auto& f) { return f.eval(y + pf.offset); }, pf.factor);
}

void validate_factor(const PlacedFactor& pf, int k) {
    const int d = factor_dim_in(pf);
    if (d <= 0) throw DegenerateData("Generator: factor consumes no coordinates");
    if (pf.offset < 0 || pf.offset + d > k)
        throw DimensionMismatch("Generator: factor slice exceeds body dimension");
    if (const auto* tf = std::get_if<TensorFactor>(&pf.factor)) {
        if (tf->profiles.empty())
            throw DegenerateData("Generator: tensor factor without profiles");
        if (!tf->inner.empty()) {
            if (tf->inner.size() != tf->profiles.size())
                throw DimensionMismatch("Generator: inner rows != profiles");
            for (const auto& row : tf->inner)
                if (static_cast<int>(row.size()) != d)
                    throw DimensionMismatch("Generator: ragged inner matrix");
        }
    } else {
        const auto& gf = std::get<GridFactor>(pf.factor);
        if (gf.dim < 1 || gf.dim > 3)
            throw DimensionMismatch("Generator: grid factor dim must be 1..3");
        std::size_t need = 1;
        for (int i = 0; i < gf.dim; ++i) {
            if (gf.shape[static_cast<std::size_t>(i)] < 2)
                throw DegenerateData("Generator: grid needs >= 2 nodes per axis");
            if (!(gf.lo[static_cast<std::size_t>(i)] < gf.hi[static_cast<std::size_t>(i)]))
                throw DegenerateData("Generator: empty grid box");
            need *= static_cast<std::size_t>(gf.shape[static_cast<std::size_t>(i)]);
        }
        if (gf.values.size() != need)
            throw DimensionMismatch("Generator: grid values size mismatch");
        if (!gf.inner.empty()) {
            if (static_cast<int>(gf.inner.size()) != gf.dim)
                throw DimensionMismatch("Generator: inner rows != grid dim");
            for (const auto& row : gf.inner)
                if (static_cast<int>(row.size()) != d)
                    throw DimensionMismatch("Generator: ragged inner matrix");
        }
    }
}

}  // namespace

Generator::Generator(std::vector<std::vector<double>> P, std::vector<PlacedFactor> factors)
    : P_(std::move(P)), factors_(std::move(factors)) {
    k_ = static_cast<int>(P_.size());
    if (k_ == 0) throw DegenerateData("Generator: empty map");
    n_ = static_cast<int>(P_.front().size());
    if (n_ == 0) throw DegenerateData("Generator: zero input dimension");
    for (const auto& row : P_)
        if (static_cast<int>(row.size()) != n_)
            throw DimensionMismatch("Generator: ragged map");
    if (factors_.empty()) throw DegenerateData("Generator: no factors");
    for (const auto& pf : factors_) validate_factor(pf, k_);
}

Generator::Generator(std::vector<std::vector<double>> P, std::vector<RidgeProfile> profiles)
    : Generator(std::move(P),
                std::vector<PlacedFactor>{
                    PlacedFactor{0, TensorFactor{std::move(profiles), {}}}}) {
    if (factor_dim_in(factors_.front()) != k_)
        throw DimensionMismatch("Generator: one profile per map row expected");
}

double Generator::body(const double* y) const {
    double prod = 1.0;
    for (const auto& pf : factors_) {
        prod *= factor_eval(pf, y);
        if (prod == 0.0) return 0.0;
    }
    return prod;
}

double Generator::evaluate(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != n_)
        throw DimensionMismatch("Generator: input dimension mismatch");
    std::vector<double> y(static_cast<std::size_t>(k_), 0.0);
    for (int r = 0; r < k_; ++r) {
        double s = 0.0;
        for (int c = 0; c < n_; ++c) s += P_[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] * x[static_cast<std::size_t>(c)];
        y[static_cast<std::size_t>(r)] = s;
    }
    return body(y.data());
}

namespace {

// Box containing {v : rows·v ∈ per-row intervals}, via the least-norm
// preimage of the interval midpoints plus a singular-value radius.
std::vector<std::pair<double, double>> constraint_box(
    const std::vector<std::vector<double>>& rows,
    const std::vector<std::pair<double, double>>& iv, int d) {
    const int m = static_cast<int>(rows.size());
    Eigen::MatrixXd A(m, d);
    Eigen::VectorXd mid(m);
    double half2 = 0.0;
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < d; ++j) A(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        mid(i) = 0.5 * (iv[static_cast<std::size_t>(i)].first + iv[static_cast<std::size_t>(i)].second);
        const double h = 0.5 * (iv[static_cast<std::size_t>(i)].second - iv[static_cast<std::size_t>(i)].first);
        half2 += h * h;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smin = m >= d ? sv(d - 1) : 0.0;
    if (!(smin > 1e-12 * (sv.size() ? sv(0) : 1.0)) || smin == 0.0)
        throw DegenerateData("support_box: factor constraints do not pin the slice");
    const Eigen::VectorXd c = svd.solve(mid);
    const double rad = std::sqrt(half2) / smin;
    std::vector<std::pair<double, double>> box(static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) box[static_cast<std::size_t>(j)] = {c(j) - rad, c(j) + rad};
    return box;
}

std::vector<std::pair<double, double>> factor_box(const PlacedFactor& pf) {
    const int d = factor_dim_in(pf);
    if (const auto* tf = std::get_if<TensorFactor>(&pf.factor)) {
        std::vector<std::pair<double, double>> iv;
        iv.reserve(tf->profiles.size());
        for (const auto& p : tf->profiles)
            iv.emplace_back(p.g.support_lo(), p.g.support_hi());
        if (tf->inner.empty()) return iv;
        return constraint_box(tf->inner, iv, d);
    }
    const auto& gf = std::get<GridFactor>(pf.factor);
    std::vector<std::pair<double, double>> iv;
    for (int i = 0; i < gf.dim; ++i)
        iv.emplace_back(gf.lo[static_cast<std::size_t>(i)], gf.hi[static_cast<std::size_t>(i)]);
    if (gf.inner.empty()) return iv;
    return constraint_box(gf.inner, iv, d);
}

}  // namespace

std::vector<std::pair<double, double>> Generator::support_box() const {
    std::vector<std::pair<double, double>> box(static_cast<std::size_t>(k_), {-kInf, kInf});
    for (const auto& pf : factors_) {
        const auto fb = factor_box(pf);
        for (std::size_t j = 0; j < fb.size(); ++j) {
            auto& b = box[static_cast<std::size_t>(pf.offset) + j];
            b.first = std::max(b.first, fb[j].first);
            b.second = std::min(b.second, fb[j].second);
        }
    }
    for (const auto& b : box) {
        if (!std::isfinite(b.first) || !std::isfinite(b.second))
            throw DegenerateData("support_box: some body coordinate is unconstrained");
        if (b.first > b.second)
            throw DegenerateData("support_box: factor supports do not intersect");
    }
    return box;
}

Generator orthogonalize(const Generator& gen) {
    const int k = gen.k(), n = gen.n();
    Eigen::MatrixXd P(k, n);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < n; ++j) P(i, j) = gen.map()[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double tol = std::max(k, n) * 2.3e-16 * (sv.size() ? sv(0) : 0.0);
    int r = 0;
    while (r < sv.size() && sv(r) > tol) ++r;
    if (r == 0) throw DegenerateData("orthogonalize: zero map");

    std::vector<std::vector<double>> newP(static_cast<std::size_t>(r),
                                          std::vector<double>(static_cast<std::size_t>(n)));
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < n; ++j) newP[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = svd.matrixV()(j, i);
    // body'(y) = body(M y) with M = U Σ_r restoring the original rows
    Eigen::MatrixXd M = svd.matrixU().leftCols(r);
    for (int c = 0; c < r; ++c) M.col(c) *= sv(c);

    std::vector<PlacedFactor> out;
    out.reserve(gen.factors().size());
    for (const auto& pf : gen.factors()) {
        const int d = factor_dim_in(pf);
        const auto compose = [&](const std::vector<std::vector<double>>& inner,
                                 std::size_t rows) {
            std::vector<std::vector<double>> comp(rows, std::vector<double>(static_cast<std::size_t>(r), 0.0));
            for (std::size_t i = 0; i < rows; ++i)
                for (int c = 0; c < r; ++c) {
                    double s = 0.0;
                    if (inner.empty()) {
                        s = M(pf.offset + static_cast<int>(i), c);
                    } else {
                        for (int j = 0; j < d; ++j)
                            s += inner[i][static_cast<std::size_t>(j)] * M(pf.offset + j, c);
                    }
                    comp[i][static_cast<std::size_t>(c)] = s;
                }
            return comp;
        };
        if (const auto* tf = std::get_if<TensorFactor>(&pf.factor)) {
            TensorFactor nf{tf->profiles, compose(tf->inner, tf->profiles.size())};
            out.push_back(PlacedFactor{0, std::move(nf)});
        } else {
            const auto& gf = std::get<GridFactor>(pf.factor);
            GridFactor nf = gf;
            nf.inner = compose(gf.inner, static_cast<std::size_t>(gf.dim));
            out.push_back(PlacedFactor{0, std::move(nf)});
        }
    }
    return Generator(std::move(newP), std::move(out));
}

Generator product_generator(const Generator& a, const Generator& b) {
    if (a.n() != b.n())
        throw DimensionMismatch("product_generator: input dimensions differ");
    std::vector<std::vector<double>> P = a.map();
    P.insert(P.end(), b.map().begin(), b.map().end());
    std::vector<PlacedFactor> factors = a.factors();
    for (PlacedFactor pf : b.factors()) {
        pf.offset += a.k();
        factors.push_back(std::move(pf));
    }
    return Generator(std::move(P), std::move(factors));
}

// ---------------------------------------------------------------------------
// Plane engine: translated rotational kernels fitted to a compactly
// supported target, with per-direction strip functions assembled exactly.

namespace {

struct PlaneAxis {
    double ax = 1.0, ay = 0.0;
    PwLinear q;  // certified strip value along this direction
    double supq = 0.0;
};

struct PlaneModel {
    std::vector<PlaneAxis> axes;
    double delta = 0.0;
    double maxq = 0.0;
    double reach_d = 0.0;  // max |knot| over all strips
    double lmodel = 0.0;   // Σ_k max |q_k'|
};

struct PlaneParams {
    int na = 32;
    double delta = 0.5;
    int cx = 8, cy = 8;
    int lawson = 12;
    double strip_weight = 0.6;
    double ridge = 0.05;
    int threads = 0;
    bool coarse = false;  // budget is out of reach; keep the audit cheap
};

struct PlaneBudget {
    double eps_fit = 0.1;  // shapes grids and subdivision thresholds only
    int max_grid = 6300;
};

struct PlaneCert {
    double core_max = 0.0, core_slack = 0.0;
    double annulus_max = 0.0, tail = 0.0;
    double r_core = 0.0, r_star = 0.0, h = 0.0;
    double total() const {
        return std::max(core_max + core_slack, std::max(annulus_max, tail));
    }
};

using Field2 = std::function<double(double, double)>;

double scan_sup(const Field2& F, const std::array<double, 4>& box, int nper) {
    double m = 0.0;
    for (int i = 0; i < nper; ++i)
        for (int j = 0; j < nper; ++j) {
            const double x = box[0] + (box[1] - box[0]) * (i + 0.5) / nper;
            const double y = box[2] + (box[3] - box[2]) * (j + 0.5) / nper;
            m = std::max(m, std::abs(F(x, y)));
        }
    return m;
}

std::vector<double> linspace_mid(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * (i + 0.5) / n;
    return v;
}

// Fits center weights by iteratively reweighted least squares against the
// target samples plus zero-target rows that tax each strip's residual mass.
PlaneModel fit_plane(const Field2& F, const std::array<double, 4>& box,
                     const PlaneParams& pp) {
    // two translate families share the center grid: the mean-zero profile
    // carries the oscillating part, the hat carries the field's mass (the
    // strip-count tail argument only needs compact strips, not cancellation)
    const PwLinear g = standard_profile().g;
    const PwLinear ghat = hat_profile().g;
    const int na = pp.na;
    const double delta = pp.delta;
    const double reach = g.support_hi() * delta;
    const double reach_hat = ghat.support_hi() * delta;

    std::vector<double> axx(static_cast<std::size_t>(na)), axy(static_cast<std::size_t>(na));
    for (int k = 0; k < na; ++k) {
        const double alpha = kPi * (k + 0.5) / na;
        axx[static_cast<std::size_t>(k)] = std::cos(alpha);
        axy[static_cast<std::size_t>(k)] = std::sin(alpha);
    }

    const auto cxs = linspace_mid(box[0], box[1], pp.cx);
    const auto cys = linspace_mid(box[2], box[3], pp.cy);
    const int ni = pp.cx * pp.cy;
    std::vector<double> zx(static_cast<std::size_t>(ni)), zy(static_cast<std::size_t>(ni));
    for (int i = 0; i < pp.cx; ++i)
        for (int j = 0; j < pp.cy; ++j) {
            zx[static_cast<std::size_t>(i * pp.cy + j)] = cxs[static_cast<std::size_t>(i)];
            zy[static_cast<std::size_t>(i * pp.cy + j)] = cys[static_cast<std::size_t>(j)];
        }

    // sample rows: the padded box at half-kernel spacing
    const double pad = reach + delta;
    const double ss = 0.5 * delta;
    const int sx = std::min<int>(96, static_cast<int>(std::ceil((box[1] - box[0] + 2 * pad) / ss)) + 1);
    const int sy = std::min<int>(96, static_cast<int>(std::ceil((box[3] - box[2] + 2 * pad) / ss)) + 1);
    const auto sxs = linspace_mid(box[0] - pad, box[1] + pad, sx);
    const auto actual_sys = linspace_mid(box[2] - pad, box[3] + pad, sy);
    const int nfit = sx * sy;

    // strip rows: every axis sampled across the full span its centers reach
    std::vector<std::pair<int, double>> strip;  // (axis, s)
    for (int k = 0; k < na; ++k) {
        double cmax = 0.0;
        for (int i = 0; i < ni; ++i)
            cmax = std::max(cmax, std::abs(axx[static_cast<std::size_t>(k)] * zx[static_cast<std::size_t>(i)] +
                                           axy[static_cast<std::size_t>(k)] * zy[static_cast<std::size_t>(i)]));
        const double span = cmax + reach;
        const double step = std::max(0.75 * delta, 2.0 * span / 400.0);
        const int ns = static_cast<int>(std::ceil(2 * span / step)) + 1;
        for (int j = 0; j < ns; ++j)
            strip.emplace_back(k, -span + 2 * span * j / std::max(1, ns - 1));
    }

    const int rows = nfit + static_cast<int>(strip.size());
    const int nc = 2 * ni;  // [mean-zero block | hat block]
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, nc);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(rows);
    const double norm = 2.0 * kPi / na;

    for (int r = 0; r < nfit; ++r)
        y(r) = F(sxs[static_cast<std::size_t>(r / sy)], actual_sys[static_cast<std::size_t>(r % sy)]);

    // per-axis accumulation: only centers whose kernel reaches the row's
    // projection contribute, found through one sorted projection list
    std::vector<std::pair<double, int>> proj(static_cast<std::size_t>(ni));
    for (int k = 0; k < na; ++k) {
        const double akx = axx[static_cast<std::size_t>(k)], aky = axy[static_cast<std::size_t>(k)];
        for (int i = 0; i < ni; ++i)
            proj[static_cast<std::size_t>(i)] = {akx * zx[static_cast<std::size_t>(i)] + aky * zy[static_cast<std::size_t>(i)], i};
        std::sort(proj.begin(), proj.end());
        const auto add_row = [&](int r, double t, double coef) {
            auto lo = std::lower_bound(proj.begin(), proj.end(),
                                       std::make_pair(t - reach, -1));
            for (; lo != proj.end() && lo->first < t + reach; ++lo) {
                const double u = t - lo->first;
                A(r, lo->second) += coef * g(u / delta);
                if (u > -reach_hat && u < reach_hat)
                    A(r, ni + lo->second) += coef * ghat(u / delta);
            }
        };
        for (int r = 0; r < nfit; ++r) {
            const double t = akx * sxs[static_cast<std::size_t>(r / sy)] +
                             aky * actual_sys[static_cast<std::size_t>(r % sy)];
            add_row(r, t, norm);
        }
        for (std::size_t sr = 0; sr < strip.size(); ++sr)
            if (strip[sr].first == k)
                add_row(nfit + static_cast<int>(sr), strip[sr].second,
                        pp.strip_weight * norm);
    }

    // Lawson sup-norm polish on the normal equations; a light diagonal tax
    // relative to the Gram scale keeps dense center grids from ringing
    Eigen::VectorXd wts = Eigen::VectorXd::Ones(rows);
    Eigen::VectorXd best = Eigen::VectorXd::Zero(nc);
    double best_score = kInf;
    Eigen::MatrixXd G(nc, nc);
    double ridge2 = 0.0;
    for (int it = 0; it < std::max(1, pp.lawson); ++it) {
        const Eigen::MatrixXd Aw = wts.cwiseSqrt().asDiagonal() * A;
        G.setZero();
        G.selfadjointView<Eigen::Lower>().rankUpdate(Aw.transpose());
        G = G.selfadjointView<Eigen::Lower>();
        if (it == 0) ridge2 = pp.ridge * G.trace() / nc;
        G.diagonal().array() += ridge2;
        const Eigen::VectorXd rhs = A.transpose() * wts.cwiseProduct(y);
        const Eigen::VectorXd w = G.ldlt().solve(rhs);
        const Eigen::VectorXd res = A * w - y;
        double mfit = 0.0, mstrip = 0.0;
        for (int r = 0; r < nfit; ++r) mfit = std::max(mfit, std::abs(res(r)));
        for (int r = nfit; r < rows; ++r) mstrip = std::max(mstrip, std::abs(res(r)));
        const double score = mfit + 2.5 * mstrip / pp.strip_weight;
        if (score < best_score) {
            best_score = score;
            best = w;
        }
        const double rmax = res.cwiseAbs().maxCoeff();
        for (int r = 0; r < rows; ++r)
            wts(r) *= std::abs(res(r)) + 1e-4 * rmax + 1e-300;
        wts *= rows / wts.sum();
    }

    // exact strip functions: union knots of the shifted kernels per axis
    PlaneModel model;
    model.delta = delta;
    model.axes.resize(static_cast<std::size_t>(na));
    for (int k = 0; k < na; ++k) {
        std::vector<double> centers(static_cast<std::size_t>(ni));
        for (int i = 0; i < ni; ++i)
            centers[static_cast<std::size_t>(i)] = axx[static_cast<std::size_t>(k)] * zx[static_cast<std::size_t>(i)] +
                                                   axy[static_cast<std::size_t>(k)] * zy[static_cast<std::size_t>(i)];
        std::vector<double> xs;
        xs.reserve(centers.size() * (g.knots_x().size() + ghat.knots_x().size()));
        for (double c : centers) {
            for (double u : g.knots_x()) xs.push_back(c + delta * u);
            for (double u : ghat.knots_x()) xs.push_back(c + delta * u);
        }
        std::sort(xs.begin(), xs.end());
        const double mtol = 1e-11 * (1.0 + std::abs(xs.back()) + std::abs(xs.front()));
        std::vector<double> ux;
        for (double x : xs)
            if (ux.empty() || x - ux.back() > mtol) ux.push_back(x);
        std::vector<double> uy(ux.size(), 0.0);
        for (std::size_t j = 0; j < ux.size(); ++j) {
            double v = 0.0;
            for (int i = 0; i < ni; ++i) {
                const double u = ux[j] - centers[static_cast<std::size_t>(i)];
                v += norm * best(i) * g(u / delta);
                if (u > -reach_hat && u < reach_hat)
                    v += norm * best(ni + i) * ghat(u / delta);
            }
            uy[j] = v;
        }
        uy.front() = 0.0;
        uy.back() = 0.0;
        PlaneAxis& ax = model.axes[static_cast<std::size_t>(k)];
        ax.ax = axx[static_cast<std::size_t>(k)];
        ax.ay = axy[static_cast<std::size_t>(k)];
        ax.q = PwLinear(std::move(ux), std::move(uy));
        ax.supq = ax.q.sup_abs();
        model.maxq = std::max(model.maxq, ax.supq);
        model.reach_d = std::max(model.reach_d,
                                 std::max(std::abs(ax.q.support_lo()), std::abs(ax.q.support_hi())));
        model.lmodel += ax.q.max_abs_slope();
    }
    return model;
}

// Strip walker: evaluates q(a·p) along a grid row in O(1) amortized per
// point by sliding a segment pointer.
struct StripSweep {
    const std::vector<double>* xs = nullptr;
    const std::vector<double>* ys = nullptr;
    std::vector<double> slope;

    void init(const PwLinear& q) {
        xs = &q.knots_x();
        ys = &q.knots_y();
        slope.assign(xs->size(), 0.0);
        for (std::size_t i = 0; i + 1 < xs->size(); ++i)
            slope[i] = ((*ys)[i + 1] - (*ys)[i]) / ((*xs)[i + 1] - (*xs)[i]);
    }
    double value_at(std::size_t seg, double s) const {
        return (*ys)[seg] + slope[seg] * (s - (*xs)[seg]);
    }
    // accumulates q(s0 + i·ds) into acc[i]; seg tracks #knots <= s
    void accumulate(double s0, double ds, std::vector<double>& acc) const {
        const auto& X = *xs;
        const std::size_t n = X.size();
        std::size_t seg = static_cast<std::size_t>(
            std::upper_bound(X.begin(), X.end(), s0) - X.begin());
        if (ds >= 0.0) {
            for (std::size_t i = 0; i < acc.size(); ++i) {
                const double s = s0 + ds * static_cast<double>(i);
                while (seg < n && s >= X[seg]) ++seg;
                if (seg == 0 || seg == n) continue;  // outside the support
                acc[i] += value_at(seg - 1, s);
            }
        } else {
            for (std::size_t i = 0; i < acc.size(); ++i) {
                const double s = s0 + ds * static_cast<double>(i);
                while (seg > 0 && s < X[seg - 1]) --seg;
                if (seg == 0 || seg == n) continue;
                acc[i] += value_at(seg - 1, s);
            }
        }
    }
};

std::pair<double, double> cos_range(double lo, double hi) {
    const double two_pi = 2.0 * kPi;
    if (hi - lo >= two_pi - 1e-12) return {-1.0, 1.0};
    const double k = std::floor(lo / two_pi);
    lo -= k * two_pi;
    hi -= k * two_pi;
    double cmax = std::max(std::cos(lo), std::cos(hi));
    double cmin = std::min(std::cos(lo), std::cos(hi));
    if (hi >= two_pi) cmax = 1.0;
    if ((lo <= kPi && hi >= kPi) || hi >= 3.0 * kPi) cmin = -1.0;
    return {cmin, cmax};
}

double strip_hits(int na, double d, double r) {
    if (r <= d) return static_cast<double>(2 * na);
    return (4.0 * na / kPi) * std::asin(d / r) + 2.0;
}

PlaneCert certify_plane(const PlaneModel& model, const Field2& F,
                        const std::array<double, 4>& box, double f_lipschitz,
                        const PlaneBudget& budget, int threads) {
    PlaneCert cert;
    const double corner = std::sqrt(std::max(box[0] * box[0], box[1] * box[1]) +
                                    std::max(box[2] * box[2], box[3] * box[3]));
    cert.r_core = corner + 2.5 * model.delta;

    // core grid, step from the slack budget but capped by point count
    const double lip = f_lipschitz + model.lmodel;
    double h = 0.2 * budget.eps_fit * std::sqrt(2.0) / std::max(lip, 1e-9);
    h = std::min(h, 0.5 * model.delta);
    const double hmin = 2.0 * cert.r_core / budget.max_grid;
    h = std::max(h, hmin);
    cert.h = h;
    const int npts = static_cast<int>(std::ceil(2.0 * cert.r_core / h)) + 1;
    const double x0 = -cert.r_core;

    std::vector<StripSweep> sweeps(model.axes.size());
    for (std::size_t k = 0; k < model.axes.size(); ++k) sweeps[k].init(model.axes[k].q);

    cert.core_max = parallel_max(
        static_cast<std::size_t>(npts),
        [&](std::size_t j) {
            const double yv = x0 + h * static_cast<double>(j);
            std::vector<double> acc(static_cast<std::size_t>(npts), 0.0);
            for (std::size_t k = 0; k < model.axes.size(); ++k) {
                const auto& ax = model.axes[k];
                sweeps[k].accumulate(ax.ax * x0 + ax.ay * yv, ax.ax * h, acc);
            }
            double m = 0.0;
            for (int i = 0; i < npts; ++i) {
                const double e = std::abs(acc[static_cast<std::size_t>(i)] - F(x0 + h * i, yv));
                m = std::max(m, e);
            }
            return m;
        },
        threads);
    cert.core_slack = lip * h / std::sqrt(2.0);

    // outer radius where the strip-count tail takes over
    const double d = model.reach_d;
    const double na = static_cast<double>(model.axes.size());
    const double ratio = model.maxq > 0.0 ? 0.8 * budget.eps_fit / model.maxq : kInf;
    if (model.maxq == 0.0) {
        cert.r_star = cert.r_core;
        cert.tail = 0.0;
        cert.annulus_max = 0.0;
        return cert;
    }
    if (ratio <= 2.05) {
        cert.r_star = std::min(4.0 * cert.r_core, cert.r_core + 40.0 * d);
    } else {
        const double beta = std::min(1.2, (ratio - 2.0) * kPi / (4.0 * na));
        cert.r_star = std::clamp(d / std::sin(beta), cert.r_core * 1.0001, 1e5);
    }
    cert.tail = strip_hits(static_cast<int>(na), d, cert.r_star) * model.maxq;

    // annulus: signed interval sums over polar cells, split where too loose
    const double thresh = std::max(0.92 * budget.eps_fit, 2.05 * model.maxq);
    struct Cell {
        double r1, r2, t1, t2;
        int depth;
    };
    std::vector<Cell> stack;
    for (double r = cert.r_core; r < cert.r_star;) {
        const double r2 = std::min(r * 1.35, cert.r_star);
        for (int s = 0; s < 64; ++s)
            stack.push_back(Cell{r, r2, 2.0 * kPi * s / 64.0, 2.0 * kPi * (s + 1) / 64.0, 0});
        r = r2;
    }
    double annmax = 0.0;
    std::size_t processed = 0;
    const std::size_t cap = 2500000;
    while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        ++processed;
        double slo = 0.0, shi = 0.0;
        for (const auto& ax : model.axes) {
            const double alpha = std::atan2(ax.ay, ax.ax);
            const auto cr = cos_range(c.t1 - alpha, c.t2 - alpha);
            const double smin = cr.first >= 0.0 ? c.r1 * cr.first : c.r2 * cr.first;
            const double smax = cr.second >= 0.0 ? c.r2 * cr.second : c.r1 * cr.second;
            const auto& X = ax.q.knots_x();
            if (smax < X.front() || smin > X.back()) continue;
            auto mm = ax.q.range_minmax(std::max(smin, X.front()), std::min(smax, X.back()));
            if (smin < X.front() || smax > X.back()) {
                mm.first = std::min(mm.first, 0.0);
                mm.second = std::max(mm.second, 0.0);
            }
            slo += mm.first;
            shi += mm.second;
        }
        const double bound = std::max(std::abs(slo), std::abs(shi));
        if (bound <= thresh || c.depth >= 15 || processed > cap) {
            annmax = std::max(annmax, bound);
            continue;
        }
        const double rmid = 0.5 * (c.r1 + c.r2);
        const double tmid = 0.5 * (c.t1 + c.t2);
        if (c.r2 - c.r1 > c.r2 * (c.t2 - c.t1)) {
            stack.push_back(Cell{c.r1, rmid, c.t1, c.t2, c.depth + 1});
            stack.push_back(Cell{rmid, c.r2, c.t1, c.t2, c.depth + 1});
        } else {
            stack.push_back(Cell{c.r1, c.r2, c.t1, tmid, c.depth + 1});
            stack.push_back(Cell{c.r1, c.r2, tmid, c.t2, c.depth + 1});
        }
    }
    cert.annulus_max = annmax;
    return cert;
}

struct Lowered {
    std::vector<Unit> units;
    std::vector<double> coeffs;
    double bias = 0.0;
    double total = 0.0;
};

// Replaces every strip function by a certified 1-D φ-expansion; the error
// bounds add across directions.
Lowered lower_plane(const PlaneModel& model, const Activation& phi,
                    double eps_low, int synth_depth, int threads) {
    Lowered out;
    double sup_sum = 0.0;
    for (const auto& ax : model.axes) sup_sum += ax.supq;
    if (sup_sum == 0.0) return out;

    // The union knot sets of the strips grow quadratically with the center
    // grid, which makes both lowering routes expensive; re-read them on a
    // nodal mesh first when part of the budget buys it. The exact route can
    // spend almost everything on the mesh, the synthesis route needs most of
    // the budget for its own fits.
    const bool exact_route = phi.is_piecewise_linear();
    const double coarse_share = exact_route ? 0.9 : 0.4;
    std::vector<PwLinear> coarse(model.axes.size());
    double coarse_err = 0.0;
    bool use_coarse = false;
    {
        double eta = 0.5 * model.delta;
        for (int pass = 0; pass < 8; ++pass) {
            double er = 0.0;
            for (std::size_t k = 0; k < model.axes.size(); ++k) {
                const PwLinear& q = model.axes[k].q;
                if (model.axes[k].supq == 0.0) continue;
                const long m0 = static_cast<long>(std::floor(q.support_lo() / eta)) - 1;
                const long m1 = static_cast<long>(std::ceil(q.support_hi() / eta)) + 1;
                std::vector<double> xs, ys;
                xs.reserve(static_cast<std::size_t>(m1 - m0 + 1));
                for (long m = m0; m <= m1; ++m) {
                    xs.push_back(eta * static_cast<double>(m));
                    ys.push_back(q(xs.back()));
                }
                ys.front() = 0.0;
                ys.back() = 0.0;
                coarse[k] = PwLinear(std::move(xs), std::move(ys));
                er += (q - coarse[k]).sup_abs();
            }
            if (er <= coarse_share * eps_low) {
                use_coarse = true;
                coarse_err = er;
                break;
            }
            if (std::getenv("UNIAPPROX_DEBUG_PLANE"))
                std::fprintf(stderr, "[lower] eta=%.2e er=%.4e budget=%.4e\n", eta, er,
                             coarse_share * eps_low);
            if (eta <= model.delta / 32.0) break;
            eta *= 0.5;
        }
        if (std::getenv("UNIAPPROX_DEBUG_PLANE"))
            std::fprintf(stderr, "[lower] use_coarse=%d coarse_err=%.4e knots0=%zu->%zu\n",
                         use_coarse ? 1 : 0, coarse_err, model.axes[0].q.knots_x().size(),
                         coarse[0].knots_x().size());
    }
    const auto target = [&](std::size_t k) -> const PwLinear& {
        return use_coarse ? coarse[k] : model.axes[k].q;
    };

    bool exact_ok = exact_route;
    std::vector<std::optional<Expansion>> exps(model.axes.size());
    if (exact_ok) {
        try {
            for (std::size_t k = 0; k < model.axes.size(); ++k) {
                if (model.axes[k].supq == 0.0) continue;
                exps[k] = fit_pl(target(k), phi, 0.0);
            }
        } catch (const TargetNotMet&) {
            exact_ok = false;
            for (auto& e : exps) e.reset();
        }
    }

    if (!exact_ok) {
        const double eps_dict = std::max(eps_low - coarse_err, 0.1 * eps_low);
        const double d = model.reach_d;
        const double spacing = std::max(0.5 * model.delta, (2.0 * d + 4.0 * model.delta) / 159.0);
        std::vector<double> kinks;
        for (double x = -d - 2.0 * model.delta; x <= d + 2.0 * model.delta + 0.5 * spacing;
             x += spacing)
            kinks.push_back(x);

        // The ladder only has to round the targets' corners to the per-axis
        // budget; its depth follows from the largest slope jump, not from a
        // fixed relative-accuracy table.  Underestimates are caught by the
        // retry pass one level deeper.
        double jmax = 0.0, eps_min = kInf;
        for (std::size_t k = 0; k < model.axes.size(); ++k) {
            if (model.axes[k].supq == 0.0) continue;
            eps_min = std::min(eps_min, eps_dict * model.axes[k].supq / sup_sum);
            const PwLinear& t = target(k);
            const auto& xs = t.knots_x();
            const auto& ys = t.knots_y();
            double prev = 0.0;
            for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
                const double sl = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
                jmax = std::max(jmax, std::abs(sl - prev));
                prev = sl;
            }
            jmax = std::max(jmax, std::abs(prev));
        }
        int depth = synth_depth;
        if (depth <= 0) {
            const double s_need = eps_min / (0.2 * std::max(jmax, 1e-300));
            depth = std::clamp(
                static_cast<int>(std::ceil(std::log2(std::max(2.0, spacing / s_need)))), 1, 8);
        }

        SynthOptions sopt;
        sopt.threads = threads;
        const bool dbg = std::getenv("UNIAPPROX_DEBUG_PLANE") != nullptr;
        double failed_sum = 0.0;
        for (int attempt = 0;; ++attempt, ++depth) {
            const auto t0 = std::chrono::steady_clock::now();
            SharedSynth shared(phi, kinks, -d - 4.0 * model.delta, d + 4.0 * model.delta,
                               depth, sopt);
            if (dbg) {
                const auto t1 = std::chrono::steady_clock::now();
                std::fprintf(stderr, "[lower] dict cols=%zu depth=%d ctor=%.1fs\n",
                             shared.column_count(), depth,
                             std::chrono::duration<double>(t1 - t0).count());
            }
            failed_sum = 0.0;
            bool failed = false;
            for (std::size_t k = 0; k < model.axes.size(); ++k) {
                if (model.axes[k].supq == 0.0 || exps[k]) continue;
                const double eps_k = eps_dict * model.axes[k].supq / sup_sum;
                const auto f0 = std::chrono::steady_clock::now();
                try {
                    exps[k] = shared.fit(target(k), eps_k);
                } catch (const TargetNotMet& e) {
                    failed = true;
                    failed_sum += e.achieved;
                }
                if (dbg && k < 4) {
                    const auto f1 = std::chrono::steady_clock::now();
                    std::fprintf(stderr, "[lower] axis %zu eps_k=%.2e fit=%.1fs %s\n", k,
                                 eps_k, std::chrono::duration<double>(f1 - f0).count(),
                                 exps[k] ? "ok" : "FAIL");
                }
            }
            if (!failed) break;
            if (attempt >= 2 || depth >= 8) {
                for (std::size_t k = 0; k < model.axes.size(); ++k)
                    if (exps[k]) failed_sum += exps[k]->error_bound;
                throw TargetNotMet(
                    "lower_plane: strip expansions exceed the reserved budget",
                    failed_sum + coarse_err);
            }
        }
    }

    out.total += coarse_err;
    for (std::size_t k = 0; k < model.axes.size(); ++k) {
        if (!exps[k]) continue;
        const auto& ax = model.axes[k];
        const Expansion& e = *exps[k];
        out.total += e.error_bound;
        out.bias += e.net.out_bias();
        const auto& layer = e.net.layers().front();
        for (std::size_t u = 0; u < layer.units.size(); ++u) {
            const double w1 = layer.units[u].w[0];
            out.units.push_back(Unit{{w1 * ax.ax, w1 * ax.ay}, layer.units[u].b});
            out.coeffs.push_back(e.net.out_coeffs()[u]);
        }
    }
    return out;
}

struct PlaneRun {
    PlaneModel model;
    PlaneCert cert;
    double qtotal = 0.0;
};

PlaneParams auto_params(const std::array<double, 4>& box, double sup_est,
                        double eps_fit, const PlaneOptions& opt) {
    PlaneParams pp;
    const double span = std::min(box[1] - box[0], box[3] - box[2]);
    const double need = sup_est > 0.0 ? 13.0 * sup_est / eps_fit : 16.0;
    const bool hopeless = need > 180.0;
    if (hopeless) {
        pp.na = 16;
        pp.delta = span / 4.5;
        pp.cx = pp.cy = 6;
        pp.lawson = 6;
        pp.coarse = true;
    } else {
        pp.na = static_cast<int>(std::clamp(8.0 * std::ceil(need / 8.0), 16.0, 256.0));
        pp.delta = span / 9.0;
        pp.lawson = opt.lawson_iters;
    }
    if (opt.axes > 0) pp.na = opt.axes;
    if (opt.delta > 0.0) pp.delta = opt.delta;
    if (!hopeless) {
        const auto count = [&](double s) {
            return std::clamp(static_cast<int>(std::ceil(s / (0.6 * pp.delta))) + 1, 3, 24);
        };
        pp.cx = count(box[1] - box[0]);
        pp.cy = count(box[3] - box[2]);
    }
    if (opt.centers > 0) pp.cx = pp.cy = opt.centers;
    pp.strip_weight = opt.strip_weight > 0.0 ? opt.strip_weight : 0.6;
    pp.threads = opt.threads;
    return pp;
}

PlaneRun run_plane(const Field2& F, const std::array<double, 4>& box,
                   double f_lipschitz, double eps_fit, const PlaneParams& pp) {
    PlaneRun run;
    run.model = fit_plane(F, box, pp);
    PlaneBudget budget;
    // grids are shaped by what is reachable, never below the strip floor
    budget.eps_fit = std::max(eps_fit, 2.3 * run.model.maxq);
    budget.max_grid = pp.coarse ? 2800 : 6300;
    run.cert = certify_plane(run.model, F, box, f_lipschitz, budget, pp.threads);
    run.qtotal = run.cert.total();
    if (std::getenv("UNIAPPROX_DEBUG_PLANE")) {
        std::fprintf(stderr,
                     "[plane] na=%d delta=%.4f cx=%d cy=%d maxq=%.5f D=%.3f "
                     "lm=%.2f core=%.5f slack=%.5f ann=%.5f tail=%.5f rc=%.2f "
                     "rs=%.2f h=%.2e total=%.5f\n",
                     pp.na, pp.delta, pp.cx, pp.cy, run.model.maxq,
                     run.model.reach_d, run.model.lmodel, run.cert.core_max,
                     run.cert.core_slack, run.cert.annulus_max, run.cert.tail,
                     run.cert.r_core, run.cert.r_star, run.cert.h, run.qtotal);
        double worst = 0.0, wx = 0.0, wy = 0.0;
        const double rc = run.cert.r_core;
        for (int i = 0; i <= 320; ++i)
            for (int j = 0; j <= 320; ++j) {
                const double x = -rc + 2 * rc * i / 320.0, yv = -rc + 2 * rc * j / 320.0;
                double m = 0.0;
                for (const auto& ax : run.model.axes) m += ax.q(ax.ax * x + ax.ay * yv);
                const double e = std::abs(m - F(x, yv));
                if (e > worst) { worst = e; wx = x; wy = yv; }
            }
        std::fprintf(stderr, "[plane] worst=%.5f at (%.3f, %.3f)\n", worst, wx, wy);
    }
    return run;
}

// Runs the fit on the box-truncated reading of the field: outside the box
// the target is its nearest edge value faded to zero across the kernel
// reach. Fields that already vanish at the edge are unchanged; open-ended
// ones become fittable, and the certificate covers the truncated reading
// (equal to the field on the box itself).
PlaneRun run_boxed(const Field2& F, const std::array<double, 4>& box,
                   double f_lipschitz, double sup_est, double eps_fit,
                   const PlaneOptions& opt, double& lip_out) {
    const PlaneParams pp = auto_params(box, sup_est, eps_fit, opt);
    const double fade = 3.0 * pp.delta;
    const Field2 Ft = [&F, box, fade](double u, double v) {
        const double px = std::clamp(u, box[0], box[1]);
        const double py = std::clamp(v, box[2], box[3]);
        const double dist = std::hypot(u - px, v - py);
        if (dist >= fade) return 0.0;
        return F(px, py) * (1.0 - dist / fade);
    };
    lip_out = f_lipschitz + sup_est / fade;
    return run_plane(Ft, box, lip_out, eps_fit, pp);
}

// The class has no empty-layer representation, so "no units" is one unit
// with a vanishing output coefficient.
Network trivial_net(int n, const Activation& phi, double bias) {
    return Network::one_layer(n, {Unit{std::vector<double>(static_cast<std::size_t>(n), 0.0), 0.0}},
                              phi, {0.0}, bias);
}

Network assemble_plane_net(const Lowered& low, const Activation& phi,
                           double cx, double cy) {
    if (low.units.empty()) return trivial_net(2, phi, low.bias);
    Network net = Network::one_layer(2, low.units, phi, low.coeffs, low.bias);
    if (cx == 0.0 && cy == 0.0) return net;
    return affine_precompose(net, {{1.0, 0.0}, {0.0, 1.0}}, {-cx, -cy});
}

SupNormCertificate plane_certificate(const PlaneCert& pc, double lowered) {
    SupNormCertificate c;
    c.grid_max = pc.core_max;
    c.lipschitz_slack = pc.core_slack + lowered;
    c.tail_bound = std::max(pc.annulus_max, pc.tail) + lowered;
    c.total = std::max(c.grid_max + c.lipschitz_slack, c.tail_bound);
    c.domain_radius = pc.r_star;
    c.grid_step = pc.h;
    return c;
}

}  // namespace

CertifiedNet kernel2d_approx(const Field2& F, std::array<double, 4> box,
                             double f_lipschitz, const Activation& phi,
                             double eps, const PlaneOptions& opt) {
    if (!(box[0] < box[1]) || !(box[2] < box[3]))
        throw DegenerateData("kernel2d_approx: empty box");
    for (double b : box)
        if (!std::isfinite(b)) throw DegenerateData("kernel2d_approx: box not finite");
    if (!(eps > 0.0)) throw ConfigError("kernel2d_approx: eps must be positive");
    if (!(f_lipschitz >= 0.0) || !std::isfinite(f_lipschitz))
        throw DegenerateData("kernel2d_approx: bad Lipschitz bound");

    const double cx = 0.5 * (box[0] + box[1]), cy = 0.5 * (box[2] + box[3]);
    const std::array<double, 4> cbox{box[0] - cx, box[1] - cx, box[2] - cy, box[3] - cy};
    const Field2 Fc = [&F, cx, cy](double u, double v) { return F(u + cx, v + cy); };

    const double sup_est = scan_sup(Fc, cbox, 41);
    const double share = std::clamp(opt.expand_share, 0.0, 0.9);
    const double eps_fit = eps * (1.0 - share);

    double lip_eff = f_lipschitz;
    const PlaneRun run = run_boxed(Fc, cbox, f_lipschitz, sup_est, eps_fit, opt, lip_eff);

    const double remaining = eps - run.qtotal;
    const double eps_low = remaining > 0.0 ? remaining : 0.15 * eps;
    Lowered low;
    try {
        low = lower_plane(run.model, phi, eps_low, opt.synth_depth, opt.threads);
    } catch (const TargetNotMet& e) {
        throw TargetNotMet("kernel2d_approx: " + std::string(e.what()),
                           run.qtotal + e.achieved);
    }

    const double total = run.qtotal + low.total;
    if (total > eps) {
        std::ostringstream msg;
        msg << "kernel2d_approx: certified error " << total << " exceeds target " << eps
            << " (kernel stage " << run.qtotal << ", strip expansion " << low.total << ")";
        throw TargetNotMet(msg.str(), total);
    }

    const SupNormCertificate cert = plane_certificate(run.cert, low.total);
    return CertifiedNet{assemble_plane_net(low, phi, cx, cy), cert.total, cert};
}

// ---------------------------------------------------------------------------
// Tensor products of profiles.

namespace {

CertifiedNet zero_certified(int n, const Activation& phi, double bound) {
    SupNormCertificate cert;
    cert.grid_max = bound;
    cert.lipschitz_slack = 0.0;
    cert.tail_bound = bound;
    cert.total = bound;
    return CertifiedNet{trivial_net(n, phi, 0.0), bound, cert};
}

CertifiedNet expand_as_certified(const RidgeProfile& g, const Activation& phi,
                                 double eps, int threads) {
    SynthOptions sopt;
    sopt.threads = threads;
    const Expansion e = expand_profile(g, phi, eps, sopt);
    return CertifiedNet{e.net, e.error_bound, e.cert};
}

CertifiedNet tensor_pair(const RidgeProfile& g1, const RidgeProfile& g2,
                         const Activation& phi, double eps, const TensorOptions& opt) {
    const PwLinear& a = g1.g;
    const PwLinear& b = g2.g;
    const Field2 F = [&a, &b](double x, double y) { return a(x) * b(y); };
    const std::array<double, 4> box{a.support_lo(), a.support_hi(), b.support_lo(),
                                    b.support_hi()};
    const double lf = g1.lipschitz * g2.sup + g1.sup * g2.lipschitz;
    PlaneOptions popt = opt.plane;
    if (popt.threads == 0) popt.threads = opt.threads;
    return kernel2d_approx(F, box, lf, phi, eps, popt);
}

// Three profiles: fit the plane model of g2 ⊗ g3 first, rebuild its strips
// on a nodal mesh, and replace every node by a shifted copy of one shared
// plane target g1 ⊗ hat. The stage bounds compose additively except for the
// final one, which the coefficient mass multiplies.
CertifiedNet tensor_triple(const std::vector<RidgeProfile>& g, const Activation& phi,
                           double eps, const TensorOptions& opt) {
    const double s1 = g[0].sup, s23 = g[1].sup * g[2].sup;
    const double supf = s1 * s23;
    const auto fallback = [&](const char* stage, double detail) {
        std::ostringstream msg;
        msg << "tensor_approx: three-factor budget does not close at eps=" << eps << " ("
            << stage << " needs " << detail
            << "); only the zero network certifies, at bound " << supf;
        return TargetNotMet(msg.str(), supf);
    };

    // inner stage on the last two profiles
    const PwLinear& b = g[1].g;
    const PwLinear& c = g[2].g;
    const Field2 F2 = [&b, &c](double x, double y) { return b(x) * c(y); };
    const std::array<double, 4> box{b.support_lo(), b.support_hi(), c.support_lo(),
                                    c.support_hi()};
    const double lf2 = g[1].lipschitz * g[2].sup + g[1].sup * g[2].lipschitz;
    const double eps_a = 0.5 * eps / s1;
    PlaneOptions popt = opt.plane;
    if (popt.threads == 0) popt.threads = opt.threads;
    double lf2_eff = lf2;
    const PlaneRun inner =
        run_boxed(F2, box, lf2, scan_sup(F2, box, 41), eps_a, popt, lf2_eff);
    if (inner.qtotal > eps_a) throw fallback("inner plane stage", inner.qtotal * s1);

    // nodal rebuild of the strips; the interpolation defect is exact algebra
    double eta = opt.mesh > 0.0 ? opt.mesh : 0.5 * inner.model.delta;
    const double er_budget = 0.15 * eps / s1;
    double er = 0.0;
    std::vector<PwLinear> nodal(inner.model.axes.size());
    for (int pass = 0; pass < 8; ++pass) {
        er = 0.0;
        for (std::size_t k = 0; k < inner.model.axes.size(); ++k) {
            const PwLinear& q = inner.model.axes[k].q;
            const long m0 = static_cast<long>(std::floor(q.support_lo() / eta)) - 1;
            const long m1 = static_cast<long>(std::ceil(q.support_hi() / eta)) + 1;
            std::vector<double> xs, ys;
            xs.reserve(static_cast<std::size_t>(m1 - m0 + 1));
            for (long m = m0; m <= m1; ++m) {
                xs.push_back(eta * static_cast<double>(m));
                ys.push_back(q(xs.back()));
            }
            ys.front() = 0.0;
            ys.back() = 0.0;
            nodal[k] = PwLinear(std::move(xs), std::move(ys));
            er += (q - nodal[k]).sup_abs();
        }
        if (er <= er_budget || eta <= inner.model.delta / 32.0) break;
        eta *= 0.5;
    }

    // node weights, pruned from the smallest up
    struct Term {
        std::size_t axis;
        double t, c;
    };
    std::vector<Term> terms;
    for (std::size_t k = 0; k < nodal.size(); ++k) {
        const auto& xs = nodal[k].knots_x();
        const auto& ys = nodal[k].knots_y();
        for (std::size_t j = 0; j < xs.size(); ++j)
            if (ys[j] != 0.0) terms.push_back(Term{k, xs[j], ys[j]});
    }
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return std::abs(a.c) < std::abs(b.c); });
    const double prune_budget = 0.04 * eps / s1;
    double pruned = 0.0;
    std::size_t first = 0;
    while (first < terms.size() && pruned + std::abs(terms[first].c) <= prune_budget)
        pruned += std::abs(terms[first++].c);
    terms.erase(terms.begin(), terms.begin() + static_cast<long>(first));

    double l1 = 0.0;
    for (const auto& t : terms) l1 += std::abs(t.c);

    const double spent = s1 * (inner.qtotal + er + pruned);
    if (terms.empty()) {
        // the surviving strip mass is zero: the model collapses to nothing
        if (spent <= eps) return zero_certified(3, phi, spent);
        throw fallback("empty nodal stage", spent);
    }
    const double eps_w = 0.96 * (eps - spent) / l1;
    if (!(eps_w > 0.0)) throw fallback("shared plane budget", spent);

    // one shared target for every node
    const PwLinear& a = g[0].g;
    const double inv_eta = 1.0 / eta;
    const Field2 FW = [&a, inv_eta](double u, double s) {
        const double t = 1.0 - std::abs(s) * inv_eta;
        return t > 0.0 ? a(u) * t : 0.0;
    };
    const std::array<double, 4> wbox{a.support_lo(), a.support_hi(), -eta, eta};
    const double lw = g[0].lipschitz + s1 * inv_eta;
    std::optional<CertifiedNet> wrun;
    try {
        wrun = kernel2d_approx(FW, wbox, lw, phi, eps_w, popt);
    } catch (const TargetNotMet& e) {
        throw fallback("shared plane stage", spent + l1 * e.achieved);
    }
    const CertifiedNet& w = *wrun;

    const std::size_t w_units = w.net.unit_count();
    if (terms.size() * w_units > opt.unit_budget) {
        std::ostringstream msg;
        msg << "tensor_approx: " << terms.size() << " nodes x " << w_units
            << " shared units exceed the unit budget " << opt.unit_budget;
        throw ConfigError(msg.str());
    }

    // every node becomes a rotated, shifted copy of the shared net
    std::vector<Unit> units;
    std::vector<double> coeffs;
    units.reserve(terms.size() * w_units);
    double bias = 0.0;
    const auto& wl = w.net.layers().front();
    for (const auto& t : terms) {
        const auto& ax = inner.model.axes[t.axis];
        for (std::size_t u = 0; u < wl.units.size(); ++u) {
            const double wu = wl.units[u].w[0], ws = wl.units[u].w[1];
            units.push_back(Unit{{wu, ws * ax.ax, ws * ax.ay},
                                 wl.units[u].b - ws * t.t});
            coeffs.push_back(t.c * w.net.out_coeffs()[u]);
        }
        bias += t.c * w.net.out_bias();
    }

    const double total = spent + l1 * w.error_bound;
    if (total > eps) throw fallback("composed bound", total);

    SupNormCertificate cert;
    cert.grid_max = 0.0;
    cert.lipschitz_slack = total;
    cert.tail_bound = total;
    cert.total = total;
    cert.domain_radius = w.cert.domain_radius;
    cert.grid_step = w.cert.grid_step;
    return CertifiedNet{
        Network::one_layer(3, std::move(units), phi, std::move(coeffs), bias), total,
        cert};
}

}  // namespace

CertifiedNet tensor_approx(const std::vector<RidgeProfile>& profiles,
                           const Activation& phi, double eps,
                           const TensorOptions& opt) {
    if (profiles.empty() || profiles.size() > 3)
        throw ConfigError("tensor_approx: supports 1 to 3 profiles");
    if (!(eps > 0.0)) throw ConfigError("tensor_approx: eps must be positive");
    double supf = 1.0;
    for (const auto& g : profiles) supf *= g.sup;
    if (supf == 0.0) return zero_certified(static_cast<int>(profiles.size()), phi, 0.0);

    switch (profiles.size()) {
    case 1:
        return expand_as_certified(profiles[0], phi, eps, opt.threads);
    case 2:
        return tensor_pair(profiles[0], profiles[1], phi, eps, opt);
    default:
        if (supf <= 0.92 * eps)
            return zero_certified(3, phi, supf);
        return tensor_triple(profiles, phi, eps, opt);
    }
}

CertifiedNet generator_approx(const Generator& gen, const Activation& phi,
                              double eps, const TensorOptions& opt) {
    if (gen.k() > 3)
        throw ConfigError("generator_approx: body dimension must be at most 3");
    std::vector<RidgeProfile> profiles;
    std::vector<std::vector<double>> rows;  // profile directions in body coords
    for (const auto& pf : gen.factors()) {
        const auto* tf = std::get_if<TensorFactor>(&pf.factor);
        if (!tf)
            throw ConfigError("generator_approx: grid factors are not supported");
        for (std::size_t i = 0; i < tf->profiles.size(); ++i) {
            profiles.push_back(tf->profiles[i]);
            std::vector<double> row(static_cast<std::size_t>(gen.k()), 0.0);
            if (tf->inner.empty()) {
                row[static_cast<std::size_t>(pf.offset) + i] = 1.0;
            } else {
                for (int j = 0; j < tf->dim_in(); ++j)
                    row[static_cast<std::size_t>(pf.offset + j)] = tf->inner[i][static_cast<std::size_t>(j)];
            }
            rows.push_back(std::move(row));
        }
    }
    if (profiles.empty() || profiles.size() > 3)
        throw ConfigError("generator_approx: needs 1 to 3 profiles in total");

    // directions pulled all the way back to the ambient space
    const std::size_t m = profiles.size();
    std::vector<std::vector<double>> A(m, std::vector<double>(static_cast<std::size_t>(gen.n()), 0.0));
    for (std::size_t i = 0; i < m; ++i)
        for (int j = 0; j < gen.n(); ++j) {
            double s = 0.0;
            for (int r = 0; r < gen.k(); ++r)
                s += rows[i][static_cast<std::size_t>(r)] *
                     gen.map()[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)];
            A[i][static_cast<std::size_t>(j)] = s;
        }

    CertifiedNet body = tensor_approx(profiles, phi, eps, opt);
    return CertifiedNet{affine_precompose(body.net, A, std::vector<double>(m, 0.0)),
                        body.error_bound, body.cert};
}

}  // namespace uniapprox
