#pragma once

#include <stdexcept>
#include <string>

namespace uniapprox {

// Hard failures: malformed inputs, impossible requests.
struct DimensionMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct IncompatibleNetworks : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DegenerateActivation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct UnsupportedActivationClass : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ProfileNotZeroMean : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct LimitsUnknown : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct SubsetBudgetExceeded : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct DegenerateData : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct InvalidTail : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Numeric failures: the computation ran but could not meet its contract.
struct QuadratureFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonConvergent : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Soft failure: construction succeeded but the requested tolerance was not
// certified.  Carries the best bound achieved so callers can report it.
struct TargetNotMet : std::runtime_error {
    double achieved;
    explicit TargetNotMet(const std::string& what, double achieved_bound)
        : std::runtime_error(what), achieved(achieved_bound) {}
};

}  // namespace uniapprox
