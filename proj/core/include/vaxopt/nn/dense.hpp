#pragma once

#include "vaxopt/nn/tape.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace vaxopt::nn {

enum class Activation {
    tanh,
    sigmoid,
    identity,
    /// lo + (hi - lo) * sigmoid(z); keeps a rate inside a closed interval.
    affine_bounded,
};

std::string to_string(Activation a);
Activation activation_from_string(const std::string& name);

struct OutputBounds {
    double lo = 0.0;
    double hi = 1.0;
};

/// Parameters of a DenseNetwork registered as leaves on a tape, in flat order.
struct BoundParameters {
    std::vector<Var> flat;
    std::size_t first_id = 0; // tape id of flat[0]
};

/// Output values and their directional derivatives along an input direction.
struct TangentOutput {
    std::vector<Var> values;
    std::vector<Var> tangents;
};

/// Fully connected feedforward network.
///
/// Layer k maps size[k] -> size[k+1] with a row-major weight matrix of shape
/// (size[k+1] x size[k]). Hidden layers share one activation; the last layer
/// has its own. Flat parameter order: for each layer, its weights then its biases.
class DenseNetwork {
public:
    DenseNetwork() = default;
    DenseNetwork(std::vector<std::size_t> sizes, Activation hidden, Activation output, OutputBounds bounds = {});

    /// Xavier/Glorot-uniform weights, zero biases.
    static DenseNetwork xavier(std::vector<std::size_t> sizes, Activation hidden, Activation output,
                               std::mt19937_64& rng, OutputBounds bounds = {});

    const std::vector<std::size_t>& sizes() const noexcept { return sizes_; }
    std::size_t layer_count() const noexcept { return weights_.size(); }
    std::size_t input_size() const { return sizes_.front(); }
    std::size_t output_size() const { return sizes_.back(); }
    Activation hidden_activation() const noexcept { return hidden_; }
    Activation output_activation() const noexcept { return output_; }
    OutputBounds bounds() const noexcept { return bounds_; }

    std::vector<double>& weights(std::size_t layer) { return weights_.at(layer); }
    const std::vector<double>& weights(std::size_t layer) const { return weights_.at(layer); }
    std::vector<double>& biases(std::size_t layer) { return biases_.at(layer); }
    const std::vector<double>& biases(std::size_t layer) const { return biases_.at(layer); }

    std::size_t parameter_count() const;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

    /// Plain evaluation. Throws ShapeError on a wrong input length.
    std::vector<double> forward(std::span<const double> input) const;

    /// Registers every parameter as a leaf node on the tape.
    BoundParameters bind(Tape& tape) const;

    /// Recorded evaluation; the returned nodes hang off `params` and `input`.
    std::vector<Var> forward(const BoundParameters& params, std::span<const Var> input) const;

    /// Recorded evaluation that also propagates the tangent d(output)/d(input) along
    /// `direction` as graph nodes, so losses built from the tangent can themselves be
    /// differentiated with respect to the parameters.
    TangentOutput forward_with_tangent(const BoundParameters& params, std::span<const Var> input,
                                       std::span<const double> direction) const;

    nlohmann::json to_json() const;
    static DenseNetwork from_json(const nlohmann::json& doc);

private:
    void check_input(std::size_t n) const;

    std::vector<std::size_t> sizes_;
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
    Activation hidden_ = Activation::tanh;
    Activation output_ = Activation::identity;
    OutputBounds bounds_{};
};

} // namespace vaxopt::nn
