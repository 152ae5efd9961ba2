#pragma once

#include <memory>
#include <vector>

#include "uniapprox/activation.hpp"
#include "uniapprox/certify.hpp"
#include "uniapprox/network.hpp"
#include "uniapprox/profile.hpp"
#include "uniapprox/pwlinear.hpp"

namespace uniapprox {

// A 1-D one-layer φ-network together with its certified sup-norm distance
// from the target over the whole line.
struct Expansion {
    Network net;
    double error_bound = 0.0;
    SupNormCertificate cert;
};

struct SynthOptions {
    int depth = -1;        // dictionary refinement depth; -1 = pick from eps
    int max_depth = 10;
    int lawson_iters = 8;  // sup-norm polishing of the least-squares fit
    double pad = 0.0;      // sampling window beyond the support; 0 = auto
    int threads = 0;
};

// Certified synthesis of a compactly supported piecewise-linear target from
// φ-units. Exact (error 0) for single-kink φ (ReLU family) and bounded-ramp
// φ; certified ε-approximation for the sigmoid/bump classes.
Expansion fit_pl(const PwLinear& target, const Activation& phi, double eps,
                 const SynthOptions& opt = {});

Expansion expand_profile(const RidgeProfile& g, const Activation& phi,
                         double eps, const SynthOptions& opt = {});

struct CompiledRiemann {
    Network net;
    double error_bound = 0.0;  // certified sup |net − f_N|
    Expansion profile;         // the shared 1-D expansion
};

CompiledRiemann compile_riemann(const RidgeProfile& g, int N,
                                const Activation& phi, double eps);

// One dictionary and one factorization shared across many targets with the
// same kink skeleton (the per-direction profiles of a 2-D compilation); each
// fit is a cheap back-substitution plus its own certificate.
class SharedSynth {
  public:
    SharedSynth(const Activation& phi, const std::vector<double>& kinks,
                double lo, double hi, int depth, const SynthOptions& opt = {});
    ~SharedSynth();
    SharedSynth(SharedSynth&&) noexcept;
    SharedSynth& operator=(SharedSynth&&) noexcept;

    // least-squares fit of the target over the shared dictionary; the
    // certificate is checked against eps (throws TargetNotMet when it fails)
    Expansion fit(const PwLinear& target, double eps) const;

    std::size_t column_count() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace uniapprox
