#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vaxopt::nn {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    AdamConfig config;
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;

    AdamState() = default;
    AdamState(std::size_t n, AdamConfig cfg) : config(cfg), m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update, in place. Throws NumericalError naming the first
/// non-finite gradient component; params and state are left untouched in that case.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads);

} // namespace vaxopt::nn
