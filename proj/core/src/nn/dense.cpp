#include "vaxopt/nn/dense.hpp"

#include "vaxopt/errors.hpp"

#include <cmath>

namespace vaxopt::nn {

namespace {

double activate(Activation a, double z, OutputBounds b)
{
    switch (a) {
    case Activation::tanh:
        return std::tanh(z);
    case Activation::sigmoid:
        return sigmoid(z);
    case Activation::identity:
        return z;
    case Activation::affine_bounded:
        return b.lo + (b.hi - b.lo) * sigmoid(z);
    }
    return z;
}

Var activate(Activation a, Var z, OutputBounds b)
{
    switch (a) {
    case Activation::tanh:
        return tanh(z);
    case Activation::sigmoid:
        return sigmoid(z);
    case Activation::identity:
        return z;
    case Activation::affine_bounded:
        return b.lo + (b.hi - b.lo) * sigmoid(z);
    }
    return z;
}

// h = act(z), returns (h, dh/dz) as nodes.
std::pair<Var, Var> activate_with_slope(Activation a, Var z, OutputBounds b)
{
    switch (a) {
    case Activation::tanh: {
        auto h = tanh(z);
        return {h, 1.0 - square(h)};
    }
    case Activation::sigmoid: {
        auto h = sigmoid(z);
        return {h, h * (1.0 - h)};
    }
    case Activation::identity:
        return {z, z.tape()->constant(1.0)};
    case Activation::affine_bounded: {
        auto s = sigmoid(z);
        return {b.lo + (b.hi - b.lo) * s, (b.hi - b.lo) * (s * (1.0 - s))};
    }
    }
    return {z, z.tape()->constant(1.0)};
}

} // namespace

std::string to_string(Activation a)
{
    switch (a) {
    case Activation::tanh:
        return "tanh";
    case Activation::sigmoid:
        return "sigmoid";
    case Activation::identity:
        return "identity";
    case Activation::affine_bounded:
        return "affine_bounded";
    }
    return "identity";
}

Activation activation_from_string(const std::string& name)
{
    if (name == "tanh") {
        return Activation::tanh;
    }
    if (name == "sigmoid") {
        return Activation::sigmoid;
    }
    if (name == "identity") {
        return Activation::identity;
    }
    if (name == "affine_bounded") {
        return Activation::affine_bounded;
    }
    throw ConfigError("unknown activation '" + name + "'");
}

DenseNetwork::DenseNetwork(std::vector<std::size_t> sizes, Activation hidden, Activation output, OutputBounds bounds)
    : sizes_(std::move(sizes)), hidden_(hidden), output_(output), bounds_(bounds)
{
    if (sizes_.size() < 2) {
        throw ShapeError("a network needs at least an input and an output layer");
    }
    for (auto s : sizes_) {
        if (s == 0) {
            throw ShapeError("layer sizes must be positive");
        }
    }
    if (output_ == Activation::affine_bounded && !(bounds_.lo <= bounds_.hi)) {
        throw ConfigError("affine-bounded output needs lo <= hi");
    }
    for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) {
        weights_.emplace_back(sizes_[k + 1] * sizes_[k], 0.0);
        biases_.emplace_back(sizes_[k + 1], 0.0);
    }
}

DenseNetwork DenseNetwork::xavier(std::vector<std::size_t> sizes, Activation hidden, Activation output,
                                  std::mt19937_64& rng, OutputBounds bounds)
{
    DenseNetwork net(std::move(sizes), hidden, output, bounds);
    for (std::size_t k = 0; k < net.layer_count(); ++k) {
        const double fan_in = static_cast<double>(net.sizes_[k]);
        const double fan_out = static_cast<double>(net.sizes_[k + 1]);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        std::uniform_real_distribution<double> dist(-limit, limit);
        for (auto& w : net.weights_[k]) {
            w = dist(rng);
        }
    }
    return net;
}

std::size_t DenseNetwork::parameter_count() const
{
    std::size_t n = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        n += weights_[k].size() + biases_[k].size();
    }
    return n;
}

std::vector<double> DenseNetwork::parameters() const
{
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        flat.insert(flat.end(), weights_[k].begin(), weights_[k].end());
        flat.insert(flat.end(), biases_[k].begin(), biases_[k].end());
    }
    return flat;
}

void DenseNetwork::set_parameters(std::span<const double> flat)
{
    if (flat.size() != parameter_count()) {
        throw ShapeError("parameter vector has " + std::to_string(flat.size()) + " entries, expected " +
                         std::to_string(parameter_count()));
    }
    std::size_t pos = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        for (auto& w : weights_[k]) {
            w = flat[pos++];
        }
        for (auto& b : biases_[k]) {
            b = flat[pos++];
        }
    }
}

void DenseNetwork::check_input(std::size_t n) const
{
    if (n != input_size()) {
        throw ShapeError("network expects " + std::to_string(input_size()) + " inputs, got " + std::to_string(n));
    }
}

std::vector<double> DenseNetwork::forward(std::span<const double> input) const
{
    check_input(input.size());
    std::vector<double> h(input.begin(), input.end());
    std::vector<double> next;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const std::size_t in = sizes_[k], out = sizes_[k + 1];
        const bool last = k + 1 == weights_.size();
        const auto act = last ? output_ : hidden_;
        next.assign(out, 0.0);
        const double* w = weights_[k].data();
        for (std::size_t j = 0; j < out; ++j) {
            double z = biases_[k][j];
            for (std::size_t i = 0; i < in; ++i) {
                z += w[j * in + i] * h[i];
            }
            next[j] = activate(act, z, bounds_);
        }
        h.swap(next);
    }
    return h;
}

BoundParameters DenseNetwork::bind(Tape& tape) const
{
    BoundParameters bp;
    bp.first_id = tape.size();
    bp.flat.reserve(parameter_count());
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        for (double w : weights_[k]) {
            bp.flat.push_back(tape.parameter(w));
        }
        for (double b : biases_[k]) {
            bp.flat.push_back(tape.parameter(b));
        }
    }
    return bp;
}

std::vector<Var> DenseNetwork::forward(const BoundParameters& params, std::span<const Var> input) const
{
    check_input(input.size());
    if (params.flat.size() != parameter_count()) {
        throw ShapeError("bound parameter count does not match the network");
    }
    Tape& tape = *input[0].tape();
    std::vector<Var> h(input.begin(), input.end());
    std::vector<Var> next;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const std::size_t in = sizes_[k], out = sizes_[k + 1];
        const bool last = k + 1 == weights_.size();
        const auto act = last ? output_ : hidden_;
        const Var* w = params.flat.data() + pos;
        const Var* b = w + in * out;
        next.clear();
        for (std::size_t j = 0; j < out; ++j) {
            auto z = tape.dot(std::span<const Var>(w + j * in, in), h, b[j]);
            next.push_back(activate(act, z, bounds_));
        }
        pos += in * out + out;
        h.swap(next);
    }
    return h;
}

TangentOutput DenseNetwork::forward_with_tangent(const BoundParameters& params, std::span<const Var> input,
                                                 std::span<const double> direction) const
{
    check_input(input.size());
    if (direction.size() != input.size()) {
        throw ShapeError("tangent direction must match the input size");
    }
    if (params.flat.size() != parameter_count()) {
        throw ShapeError("bound parameter count does not match the network");
    }
    Tape& tape = *input[0].tape();
    std::vector<Var> h(input.begin(), input.end());
    std::vector<Var> dh;
    std::vector<Var> next, dnext;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
        const std::size_t in = sizes_[k], out = sizes_[k + 1];
        const bool last = k + 1 == weights_.size();
        const auto act = last ? output_ : hidden_;
        const Var* w = params.flat.data() + pos;
        const Var* b = w + in * out;
        next.clear();
        dnext.clear();
        for (std::size_t j = 0; j < out; ++j) {
            std::span<const Var> row(w + j * in, in);
            auto z = tape.dot(row, h, b[j]);
            auto dz = k == 0 ? tape.dot(row, direction) : tape.dot(row, dh);
            auto [a, slope] = activate_with_slope(act, z, bounds_);
            next.push_back(a);
            dnext.push_back(slope * dz);
        }
        pos += in * out + out;
        h.swap(next);
        dh.swap(dnext);
    }
    return {std::move(h), std::move(dh)};
}

nlohmann::json DenseNetwork::to_json() const
{
    nlohmann::json doc;
    doc["sizes"] = sizes_;
    doc["weights"] = weights_;
    doc["biases"] = biases_;
    doc["activations"] = {to_string(hidden_), to_string(output_)};
    if (output_ == Activation::affine_bounded) {
        doc["bounds"] = {bounds_.lo, bounds_.hi};
    }
    return doc;
}

DenseNetwork DenseNetwork::from_json(const nlohmann::json& doc)
{
    try {
        auto sizes = doc.at("sizes").get<std::vector<std::size_t>>();
        const auto& acts = doc.at("activations");
        OutputBounds bounds{};
        if (doc.contains("bounds")) {
            bounds = {doc["bounds"].at(0).get<double>(), doc["bounds"].at(1).get<double>()};
        }
        DenseNetwork net(sizes, activation_from_string(acts.at(0).get<std::string>()),
                         activation_from_string(acts.at(1).get<std::string>()), bounds);
        auto weights = doc.at("weights").get<std::vector<std::vector<double>>>();
        auto biases = doc.at("biases").get<std::vector<std::vector<double>>>();
        if (weights.size() != net.weights_.size() || biases.size() != net.biases_.size()) {
            throw ShapeError("layer count does not match sizes");
        }
        for (std::size_t k = 0; k < weights.size(); ++k) {
            if (weights[k].size() != net.weights_[k].size() || biases[k].size() != net.biases_[k].size()) {
                throw ShapeError("layer " + std::to_string(k) + " has the wrong shape");
            }
        }
        net.weights_ = std::move(weights);
        net.biases_ = std::move(biases);
        return net;
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed network document: ") + e.what());
    }
}

} // namespace vaxopt::nn
