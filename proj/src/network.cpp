#include "uniapprox/network.hpp"

#include <cmath>
#include <cstring>

#include "json.hpp"

#include "uniapprox/errors.hpp"

namespace uniapprox {

namespace {

void apply_activation(const Activation& act, std::vector<double>& v) {
    switch (act.kind()) {
        case ActKind::Tanh:
            for (double& t : v) t = std::tanh(t);
            return;
        case ActKind::Logistic:
            for (double& t : v)
                t = t >= 0.0 ? 1.0 / (1.0 + std::exp(-t))
                             : std::exp(t) / (1.0 + std::exp(t));
            return;
        case ActKind::Softplus:
            for (double& t : v)
                t = t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
            return;
        case ActKind::Gaussian:
            for (double& t : v) t = std::exp(-t * t);
            return;
        case ActKind::PiecewiseLinear: {
            const PwLinear& pl = act.pw();
            for (double& t : v) t = pl(t);
            return;
        }
        case ActKind::Custom:
            for (double& t : v) t = act(t);
            return;
    }
}

}  // namespace

Network::Network(int input_dim, std::vector<Layer> layers,
                 std::vector<double> out_coeffs, double out_bias)
    : input_dim_(input_dim), layers_(std::move(layers)),
      out_coeffs_(std::move(out_coeffs)), out_bias_(out_bias) {
    if (input_dim_ <= 0) throw DimensionMismatch("Network: input_dim must be positive");
    if (layers_.empty()) throw DimensionMismatch("Network: need at least one layer");
    std::size_t fan_in = static_cast<std::size_t>(input_dim_);
    for (std::size_t li = 0; li < layers_.size(); ++li) {
        if (layers_[li].units.empty())
            throw DimensionMismatch("Network: empty layer");
        for (const Unit& u : layers_[li].units)
            if (u.w.size() != fan_in)
                throw DimensionMismatch("Network: fan-in mismatch at layer " +
                                        std::to_string(li));
        fan_in = layers_[li].units.size();
    }
    if (out_coeffs_.size() != fan_in)
        throw DimensionMismatch("Network: output coefficient count mismatch");
}

Network Network::one_layer(int input_dim, std::vector<Unit> units,
                           const Activation& phi, std::vector<double> coeffs,
                           double bias) {
    std::vector<Layer> ls;
    ls.push_back(Layer{std::move(units), phi});
    return Network(input_dim, std::move(ls), std::move(coeffs), bias);
}

double Network::evaluate(const double* x, std::size_t dim) const {
    if (dim != static_cast<std::size_t>(input_dim_))
        throw DimensionMismatch("Network::evaluate: point dimension mismatch");
    std::vector<double> cur(x, x + dim), next;
    for (const Layer& layer : layers_) {
        next.resize(layer.units.size());
        for (std::size_t j = 0; j < layer.units.size(); ++j) {
            const Unit& u = layer.units[j];
            double s = u.b;
            for (std::size_t i = 0; i < u.w.size(); ++i) s += u.w[i] * cur[i];
            next[j] = s;
        }
        apply_activation(layer.activation, next);
        cur.swap(next);
    }
    double out = out_bias_;
    for (std::size_t j = 0; j < cur.size(); ++j) out += out_coeffs_[j] * cur[j];
    return out;
}

std::size_t Network::unit_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers_) n += l.units.size();
    return n;
}

double Network::coeff_l1() const {
    double s = 0.0;
    for (double c : out_coeffs_) s += std::abs(c);
    return s;
}

Network affine_precompose(const Network& net,
                          const std::vector<std::vector<double>>& A,
                          const std::vector<double>& b) {
    const std::size_t n = static_cast<std::size_t>(net.input_dim());
    if (A.size() != n || b.size() != n)
        throw DimensionMismatch("affine_precompose: A/b must have net.input_dim rows");
    const std::size_t new_dim = A.empty() ? 0 : A[0].size();
    for (const auto& row : A)
        if (row.size() != new_dim)
            throw DimensionMismatch("affine_precompose: ragged matrix");
    if (new_dim == 0) throw DimensionMismatch("affine_precompose: empty matrix");

    std::vector<Layer> layers = net.layers();
    for (Unit& u : layers[0].units) {
        std::vector<double> nw(new_dim, 0.0);
        double nb = u.b;
        for (std::size_t i = 0; i < n; ++i) {
            nb += u.w[i] * b[i];
            for (std::size_t k = 0; k < new_dim; ++k) nw[k] += u.w[i] * A[i][k];
        }
        u.w = std::move(nw);
        u.b = nb;
    }
    return Network(static_cast<int>(new_dim), std::move(layers),
                   net.out_coeffs(), net.out_bias());
}

Network insert_hidden(const Network& outer, const Network& inner_1d) {
    if (inner_1d.input_dim() != 1)
        throw IncompatibleNetworks("insert_hidden: inner net must be 1-D");
    if (inner_1d.depth() != 1)
        throw IncompatibleNetworks("insert_hidden: inner net must be one-layer");

    const Layer& last = outer.layers().back();
    const Layer& inner = inner_1d.layers().front();
    const std::vector<double>& cj = outer.out_coeffs();
    const std::vector<double>& ck = inner_1d.out_coeffs();

    Layer merged{std::vector<Unit>{}, inner.activation};
    std::vector<double> coeffs;
    merged.units.reserve(last.units.size() * inner.units.size());
    coeffs.reserve(merged.units.capacity());
    for (std::size_t j = 0; j < last.units.size(); ++j) {
        const Unit& uj = last.units[j];
        for (std::size_t k = 0; k < inner.units.size(); ++k) {
            const double ak = inner.units[k].w[0];
            Unit nu;
            nu.w.resize(uj.w.size());
            for (std::size_t i = 0; i < uj.w.size(); ++i) nu.w[i] = ak * uj.w[i];
            nu.b = ak * uj.b + inner.units[k].b;
            merged.units.push_back(std::move(nu));
            coeffs.push_back(cj[j] * ck[k]);
        }
    }
    double cj_sum = 0.0;
    for (double c : cj) cj_sum += c;

    std::vector<Layer> layers(outer.layers().begin(), outer.layers().end() - 1);
    layers.push_back(std::move(merged));
    return Network(outer.input_dim(), std::move(layers), std::move(coeffs),
                   outer.out_bias() + cj_sum * inner_1d.out_bias());
}

Network linear_combine(const std::vector<std::pair<Network, double>>& parts) {
    if (parts.empty())
        throw DegenerateData("linear_combine: empty list");
    const Network& first = parts.front().first;
    for (const auto& [net, c] : parts) {
        (void)c;
        if (net.input_dim() != first.input_dim() || net.depth() != first.depth())
            throw IncompatibleNetworks("linear_combine: shape mismatch");
        for (std::size_t li = 0; li < net.depth(); ++li)
            if (net.layers()[li].activation.name() !=
                first.layers()[li].activation.name())
                throw IncompatibleNetworks("linear_combine: activation mismatch");
    }

    // Block-diagonal merge: first layer concatenates over the shared input;
    // deeper layers get zero-padded fan-in so each block only sees its own
    // predecessors.
    const std::size_t depth = first.depth();
    std::vector<Layer> layers;
    layers.reserve(depth);
    for (std::size_t li = 0; li < depth; ++li) {
        Layer merged{std::vector<Unit>{}, first.layers()[li].activation};
        std::size_t prev_total = 0;  // running offset into merged previous layer
        for (const auto& [net, c] : parts) {
            (void)c;
            const Layer& src = net.layers()[li];
            if (li == 0) {
                for (const Unit& u : src.units) merged.units.push_back(u);
            } else {
                const std::size_t prev_units = net.layers()[li - 1].units.size();
                std::size_t total_prev = 0;
                for (const auto& [n2, c2] : parts) {
                    (void)c2;
                    total_prev += n2.layers()[li - 1].units.size();
                }
                for (const Unit& u : src.units) {
                    Unit nu;
                    nu.w.assign(total_prev, 0.0);
                    for (std::size_t i = 0; i < prev_units; ++i)
                        nu.w[prev_total + i] = u.w[i];
                    nu.b = u.b;
                    merged.units.push_back(std::move(nu));
                }
                prev_total += prev_units;
            }
        }
        layers.push_back(std::move(merged));
    }
    std::vector<double> coeffs;
    double bias = 0.0;
    for (const auto& [net, c] : parts) {
        for (double oc : net.out_coeffs()) coeffs.push_back(c * oc);
        bias += c * net.out_bias();
    }
    return Network(first.input_dim(), std::move(layers), std::move(coeffs), bias);
}

Network dedup_last_layer(const Network& net) {
    const Layer& last = net.layers().back();
    std::vector<Unit> units;
    std::vector<double> coeffs;
    for (std::size_t j = 0; j < last.units.size(); ++j) {
        const Unit& u = last.units[j];
        bool found = false;
        for (std::size_t k = 0; k < units.size(); ++k) {
            if (units[k].b == u.b && units[k].w.size() == u.w.size() &&
                std::memcmp(units[k].w.data(), u.w.data(),
                            u.w.size() * sizeof(double)) == 0) {
                coeffs[k] += net.out_coeffs()[j];
                found = true;
                break;
            }
        }
        if (!found) {
            units.push_back(u);
            coeffs.push_back(net.out_coeffs()[j]);
        }
    }
    // drop exactly-zero coefficients (keep at least one unit)
    std::vector<Unit> fu;
    std::vector<double> fc;
    for (std::size_t k = 0; k < units.size(); ++k) {
        if (coeffs[k] != 0.0) {
            fu.push_back(std::move(units[k]));
            fc.push_back(coeffs[k]);
        }
    }
    if (fu.empty()) {
        fu.push_back(units.front());
        fc.push_back(0.0);
    }
    std::vector<Layer> layers(net.layers().begin(), net.layers().end() - 1);
    layers.push_back(Layer{std::move(fu), last.activation});
    return Network(net.input_dim(), std::move(layers), std::move(fc),
                   net.out_bias());
}

namespace {

nlohmann::json activation_to_json(const Activation& act) {
    // Built-ins serialize by identifier; piecewise-linear customs by knots.
    const std::string& n = act.name();
    if (n == "relu" || n == "leaky_relu" || n == "softplus" || n == "tanh" ||
        n == "logistic" || n == "gaussian" || n == "v1")
        return n;
    if (act.is_piecewise_linear()) {
        const PwLinear& pl = act.pw();
        nlohmann::json knots = nlohmann::json::array();
        for (std::size_t i = 0; i < pl.knots_x().size(); ++i)
            knots.push_back({pl.knots_x()[i], pl.knots_y()[i]});
        return {{"name", n},
                {"knots", knots},
                {"left_slope", pl.left_slope()},
                {"right_slope", pl.right_slope()}};
    }
    throw ConfigError("serialize: activation '" + n +
                      "' has no serializable form");
}

Activation activation_from_json(const nlohmann::json& j) {
    if (j.is_string()) return Activation::by_name(j.get<std::string>());
    if (!j.contains("knots"))
        throw ConfigError("activation JSON: need identifier or knot list");
    std::vector<double> xs, ys;
    for (const auto& kv : j.at("knots")) {
        xs.push_back(kv.at(0).get<double>());
        ys.push_back(kv.at(1).get<double>());
    }
    PwLinear pl(std::move(xs), std::move(ys),
                j.value("left_slope", 0.0), j.value("right_slope", 0.0));
    return Activation::from_pwlinear(j.value("name", std::string("custom_pl")),
                                     std::move(pl));
}

}  // namespace

std::string serialize(const Network& net) {
    nlohmann::json j;
    j["input_dim"] = net.input_dim();
    nlohmann::json layers = nlohmann::json::array();
    for (const Layer& l : net.layers()) {
        nlohmann::json units = nlohmann::json::array();
        for (const Unit& u : l.units)
            units.push_back({{"w", u.w}, {"b", u.b}});
        layers.push_back(
            {{"activation", activation_to_json(l.activation)}, {"units", units}});
    }
    j["layers"] = layers;
    j["out_coeffs"] = net.out_coeffs();
    j["out_bias"] = net.out_bias();
    return j.dump();
}

Network deserialize(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("deserialize: ") + e.what());
    }
    try {
    std::vector<Layer> layers;
    for (const auto& lj : j.at("layers")) {
        Layer l{std::vector<Unit>{}, activation_from_json(lj.at("activation"))};
        for (const auto& uj : lj.at("units")) {
            Unit u;
            u.w = uj.at("w").get<std::vector<double>>();
            u.b = uj.at("b").get<double>();
            l.units.push_back(std::move(u));
        }
        layers.push_back(std::move(l));
    }
    return Network(j.at("input_dim").get<int>(), std::move(layers),
                   j.at("out_coeffs").get<std::vector<double>>(),
                   j.value("out_bias", 0.0));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("deserialize: ") + e.what());
    }
}

}  // namespace uniapprox
