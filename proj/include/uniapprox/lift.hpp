#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <utility>
#include <variant>
#include <vector>

#include "uniapprox/activation.hpp"
#include "uniapprox/certify.hpp"
#include "uniapprox/network.hpp"
#include "uniapprox/profile.hpp"

namespace uniapprox {

// One multiplicative block of a generator body: a product of 1-D profiles
// applied to the rows of an inner matrix. An empty matrix means the
// identity, one profile per consumed coordinate.
struct TensorFactor {
    std::vector<RidgeProfile> profiles;
    // profiles.size() x dim_in; empty = identity (dim_in = profiles.size())
    std::vector<std::vector<double>> inner;

    int dim_in() const {
        return inner.empty() ? static_cast<int>(profiles.size())
                             : static_cast<int>(inner.front().size());
    }
    double eval(const double* v) const;
};

// Multilinear interpolant on a uniform grid over a compact box, zero
// outside. Boundary values should vanish for continuity; the Lipschitz
// constant is recorded by the caller and trusted by certificates.
struct GridFactor {
    int dim = 0;  // 1..3
    std::array<double, 3> lo{};
    std::array<double, 3> hi{};
    std::array<int, 3> shape{};
    std::vector<double> values;  // row-major
    double lipschitz = 0.0;
    std::vector<std::vector<double>> inner;  // dim x dim_in; empty = identity

    int dim_in() const {
        return inner.empty() ? dim : static_cast<int>(inner.front().size());
    }
    double eval(const double* v) const;
};

struct PlacedFactor {
    int offset = 0;  // first body coordinate this factor consumes
    std::variant<TensorFactor, GridFactor> factor;
};

// g(Px): a compactly supported body g on R^k pulled back through a linear
// map P (k x n). The body is a product of placed factors over disjoint
// coordinate slices.
class Generator {
  public:
    Generator(std::vector<std::vector<double>> P,
              std::vector<PlacedFactor> factors);
    // plain tensor body, one profile per body coordinate
    Generator(std::vector<std::vector<double>> P,
              std::vector<RidgeProfile> profiles);

    int n() const { return n_; }
    int k() const { return k_; }
    const std::vector<std::vector<double>>& map() const { return P_; }
    const std::vector<PlacedFactor>& factors() const { return factors_; }

    double body(const double* y) const;
    double evaluate(const std::vector<double>& x) const;

    // box in body coordinates outside which the body vanishes
    std::vector<std::pair<double, double>> support_box() const;

  private:
    int n_ = 0;
    int k_ = 0;
    std::vector<std::vector<double>> P_;
    std::vector<PlacedFactor> factors_;
};

// Equivalent generator whose map has orthonormal rows spanning (ker P)^⊥;
// rank-deficient maps come back with k reduced to rank(P). Exact up to
// floating point: evaluations agree to ~1e-12.
Generator orthogonalize(const Generator& gen);

// Pointwise product: stacked map, concatenated body factors. Exact.
Generator product_generator(const Generator& a, const Generator& b);

// Tuning for the plane fit shared by tensor_approx, generator_approx, and
// the two-layer compiler. Zeros mean "derive from the target and budget".
struct PlaneOptions {
    int axes = 0;              // ridge axes over the half circle
    double delta = 0.0;        // kernel scale
    int centers = 0;           // weight centers per box edge
    int lawson_iters = 12;
    double strip_weight = 0.6;  // weight of per-axis leakage rows vs fit rows
    double expand_share = 0.2;  // fraction of eps held back for 1-D lowering
    int synth_depth = 0;        // ladder depth for smooth activations
    int threads = 0;
};

struct CertifiedNet {
    Network net;
    double error_bound = 0.0;
    SupNormCertificate cert;
};

// One-layer net over phi approximating a Lipschitz F supported in the given
// box, certified over all of R^2: fine grid on a core disc, signed interval
// cells over the strip annulus, and a strip-count tail beyond.
CertifiedNet kernel2d_approx(const std::function<double(double, double)>& F,
                             std::array<double, 4> box,  // xlo xhi ylo yhi
                             double f_lipschitz, const Activation& phi,
                             double eps, const PlaneOptions& opt = {});

struct TensorOptions {
    PlaneOptions plane;
    double mesh = 0.0;  // nodal mesh for the three-factor stage
    std::size_t unit_budget = 2000000;
    int threads = 0;
};

// One-layer phi-network within eps of g1 ⊗ ... ⊗ gn in sup norm over R^n.
// n = 2 runs the plane fit directly; n = 3 pairs the first profile with a
// nodal rebuild of the plane model for the remaining two and reuses one
// shared plane target across all nodes. Throws TargetNotMet (with the bound
// actually reached) when the composed budget does not close.
CertifiedNet tensor_approx(const std::vector<RidgeProfile>& profiles,
                           const Activation& phi, double eps,
                           const TensorOptions& opt = {});

// tensor_approx on the body, precomposed by the generator map. The
// certificate carries over: sup over R^n of the pulled-back error is at
// most the body bound. Body must be tensor-of-profiles with k <= 3.
CertifiedNet generator_approx(const Generator& gen, const Activation& phi,
                              double eps, const TensorOptions& opt = {});

}  // namespace uniapprox
