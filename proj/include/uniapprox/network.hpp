#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "uniapprox/activation.hpp"

namespace uniapprox {

// One unit: pre-activation weights (first layer: a direction in ℝⁿ; deeper
// layers: fan-in weights over the previous layer's outputs) plus a bias.
struct Unit {
    std::vector<double> w;
    double b = 0.0;
};

struct Layer {
    std::vector<Unit> units;
    Activation activation;
};

// Layered ridge expansion:  x ↦ Σ_j c_j · (last layer outputs)_j + out_bias,
// layer k unit j computing φ(w_j · inputs + b_j).
class Network {
  public:
    Network(int input_dim, std::vector<Layer> layers,
            std::vector<double> out_coeffs, double out_bias = 0.0);

    // Convenience: a one-layer net Σ c_j φ(a_j·x + b_j) + bias.
    static Network one_layer(int input_dim, std::vector<Unit> units,
                             const Activation& phi,
                             std::vector<double> coeffs, double bias = 0.0);

    double evaluate(const double* x, std::size_t dim) const;
    double evaluate(const std::vector<double>& x) const {
        return evaluate(x.data(), x.size());
    }
    double operator()(const std::vector<double>& x) const { return evaluate(x); }
    double operator()(double x) const { return evaluate(&x, 1); }
    double operator()(double x, double y) const {
        const double p[2] = {x, y};
        return evaluate(p, 2);
    }

    int input_dim() const { return input_dim_; }
    std::size_t depth() const { return layers_.size(); }
    const std::vector<Layer>& layers() const { return layers_; }
    const std::vector<double>& out_coeffs() const { return out_coeffs_; }
    double out_bias() const { return out_bias_; }
    std::size_t unit_count() const;

    // Sum of |c_j| over output coefficients (used by tail certificates).
    double coeff_l1() const;

  private:
    int input_dim_;
    std::vector<Layer> layers_;
    std::vector<double> out_coeffs_;
    double out_bias_;
};

// evaluate(result, x) == evaluate(net, A·x + b); A given as net.input_dim
// rows of length new_dim.  Rewrites only first-layer directions/biases.
Network affine_precompose(const Network& net,
                          const std::vector<std::vector<double>>& A,
                          const std::vector<double>& b);

// Substitute a 1-D one-layer φ-net for the scalar argument of the last
// layer: Σ_j c_j inner(f_j(x)+b_j).  Unit count multiplies (J·K).
Network insert_hidden(const Network& outer, const Network& inner_1d);

// Weighted sum of same-shape networks as a single network.
Network linear_combine(const std::vector<std::pair<Network, double>>& parts);

// Merge bitwise-identical (w,b) units of the last layer (coefficients add),
// dropping zero-coefficient units.
Network dedup_last_layer(const Network& net);

std::string serialize(const Network& net);
Network deserialize(const std::string& json_text);

}  // namespace uniapprox
