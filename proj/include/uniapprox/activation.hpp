#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "uniapprox/pwlinear.hpp"

namespace uniapprox {

// Asymptotic behaviour tags.  AsympLinear records (slope, intercept) at +∞
// first, then at −∞, so ReLU is {1,0,0,0}.
struct FiniteLimits {
    double at_minus_inf = 0.0;
    double at_plus_inf = 0.0;
    bool distinct() const { return at_minus_inf != at_plus_inf; }
};
struct AsympLinear {
    double a1 = 0.0, b1 = 0.0;  // +∞
    double a2 = 0.0, b2 = 0.0;  // −∞
};
struct OtherAsymptotics {};
using Asymptotics = std::variant<FiniteLimits, AsympLinear, OtherAsymptotics>;

// Dispatch tag so batch evaluation can avoid the std::function indirection
// in hot loops (network evaluation over large sample sets).
enum class ActKind { Tanh, Logistic, Softplus, Gaussian, PiecewiseLinear, Custom };

class Activation {
  public:
    Activation(std::string name, std::function<double(double)> fn,
               Asymptotics asym, double lipschitz, ActKind kind = ActKind::Custom)
        : name_(std::move(name)), fn_(std::move(fn)), asym_(asym),
          lipschitz_(lipschitz), kind_(kind) {}

    Activation(std::string name, PwLinear pl, Asymptotics asym)
        : name_(std::move(name)), fn_(nullptr), asym_(asym),
          lipschitz_(pl.max_abs_slope()), kind_(ActKind::PiecewiseLinear),
          pl_(std::move(pl)) {}

    double operator()(double x) const {
        return pl_ ? (*pl_)(x) : fn_(x);
    }

    const std::string& name() const { return name_; }
    const Asymptotics& asymptotics() const { return asym_; }
    double lipschitz() const { return lipschitz_; }
    ActKind kind() const { return kind_; }
    bool is_piecewise_linear() const { return pl_.has_value(); }
    const PwLinear& pw() const {
        if (!pl_) throw UnsupportedActivationClass(
            "activation '" + name_ + "' has no piecewise-linear form");
        return *pl_;
    }

    // Built-ins (spec'd identifiers).
    static Activation relu();
    static Activation leaky_relu();   // slope 0.01 on the left
    static Activation softplus();
    static Activation tanh_act();
    static Activation logistic();
    static Activation gaussian();
    static Activation unit_ramp();    // v1

    static Activation from_pwlinear(std::string name, PwLinear pl);
    // Lookup by CLI identifier ("relu", "tanh", ...); throws ConfigError.
    static Activation by_name(const std::string& id);

  private:
    std::string name_;
    std::function<double(double)> fn_;
    Asymptotics asym_;
    double lipschitz_;
    ActKind kind_;
    std::optional<PwLinear> pl_;
};

struct ClassifyReport {
    Asymptotics tag;
    double residual;  // disagreement between the last probes used
};

// Probe-based asymptotics classification at t = probe_ts (default 2^4..2^20).
// Each side independently resolves to a finite limit or an asymptotic line;
// both finite ⇒ FiniteLimits, otherwise AsympLinear with limits encoded as
// zero-slope lines.  Throws NonConvergent when neither stabilizes.
ClassifyReport classify(const std::function<double(double)>& phi,
                        const std::vector<double>& probe_ts);
ClassifyReport classify(const Activation& phi,
                        const std::vector<double>& probe_ts);
std::vector<double> default_probe_ts();

// χ(x) = φ(x−2) − 2φ(x−1) + φ(x): a C₀ bump for non-affine φ with linear or
// finite asymptotics.  Keeps an exact piecewise-linear form when φ has one.
Activation second_difference(const Activation& phi);

// φ(x) − φ(x−1): a C₀ bump for nonconstant φ with finite limits.
Activation shift_difference(const Activation& phi);

}  // namespace uniapprox
