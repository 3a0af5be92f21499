#include "vaxopt/nn/adam.hpp"

#include "vaxopt/errors.hpp"

#include <cmath>
#include <string>

namespace vaxopt::nn {

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads)
{
    if (params.size() != grads.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
        throw ShapeError("adam_step: params, grads and state sizes differ");
    }
    for (std::size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw NumericalError("adam_step: non-finite gradient component " + std::to_string(i), i);
        }
    }
    const auto& c = state.config;
    ++state.t;
    const double t = static_cast<double>(state.t);
    const double bc1 = 1.0 - std::pow(c.beta1, t);
    const double bc2 = 1.0 - std::pow(c.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = c.beta1 * state.m[i] + (1.0 - c.beta1) * g;
        state.v[i] = c.beta2 * state.v[i] + (1.0 - c.beta2) * g * g;
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    }
}

} // namespace vaxopt::nn
