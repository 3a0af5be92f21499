#pragma once

// SVEI3RD dynamics. Everything numeric is templated on the scalar type so the same
// transcription runs on plain doubles and on recorded tape variables.

#include "vaxopt/nn/tape.hpp"
#include "vaxopt/promote.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

namespace vaxopt::epi {

inline constexpr std::size_t kCompartments = 8;

inline constexpr std::array<const char*, kCompartments> kCompartmentNames = {"S", "V", "E", "I1", "I2", "I3", "R", "D"};

/// Proportions of the population in each compartment at one instant.
template <class T>
struct BasicState {
    T S{}, V{}, E{}, I1{}, I2{}, I3{}, R{}, D{};

    T& operator[](std::size_t k) { return this->*kMembers[k]; }
    const T& operator[](std::size_t k) const { return this->*kMembers[k]; }

    static constexpr std::array<T BasicState::*, kCompartments> kMembers = {
        &BasicState::S,  &BasicState::V,  &BasicState::E, &BasicState::I1,
        &BasicState::I2, &BasicState::I3, &BasicState::R, &BasicState::D,
    };
};

using CompartmentState = BasicState<double>;

bool operator==(const CompartmentState& a, const CompartmentState& b);

/// Throws InputError unless every component is finite and non-negative.
void validate(const CompartmentState& x);

double total(const CompartmentState& x);

/// p1(alpha) = a + b * alpha, clamped to [0, 1].
struct HospitalizationLink {
    double intercept = 0.0060;
    double slope = -0.1341;
};

template <class T>
T hospitalization_rate(const T& alpha, const HospitalizationLink& link)
{
    using nn::clamp;
    return clamp(link.intercept + link.slope * alpha, 0.0, 1.0);
}

/// Rate constants of the dynamics, generic so calibration can train them.
template <class P>
struct BasicRates {
    P lambda{};     // inflow /day
    P zeta{};       // outflow /day
    P beta1{}, beta2{}, beta3{};
    P sigma_vacc{}; // vaccine inefficiency
    P gamma{};      // incubation /day
    P delta1{}, delta2{}, delta3{};
    P p2{};         // hospital -> ICU /day
    P mu{};         // ICU mortality /day
};

struct EpidemicParams : BasicRates<double> {
    HospitalizationLink hosp_link{};
};

/// Rate constants used throughout the case study (Victoria, late 2021).
EpidemicParams baseline_params();

/// Throws ConfigError on negative rates or sigma_vacc outside [0, 1].
void validate(const EpidemicParams& p);

struct NoiseIntensities {
    std::array<double, kCompartments> sigma{};
};

NoiseIntensities baseline_noise();
NoiseIntensities scaled(const NoiseIntensities& z, double factor);

/// Training-window starting state (2021-10-04).
CompartmentState baseline_train_state();
/// Test-window starting state (2021-12-03).
CompartmentState baseline_test_state();

/// Right-hand side with an explicit mild-to-hospital rate p1.
template <class X, class A, class P, class Q>
BasicState<promote_t<X, A, P, Q>> drift_with_p1(const BasicState<X>& x, const A& alpha, const BasicRates<P>& p,
                                                const Q& p1)
{
    using R = promote_t<X, A, P, Q>;
    const auto force = p.beta1 * x.I1 + p.beta2 * x.I2 + p.beta3 * x.I3;
    BasicState<R> b;
    b.S = p.lambda - force * x.S - alpha * x.S - p.zeta * x.S;
    b.V = alpha * x.S - force * p.sigma_vacc * x.V - p.zeta * x.V;
    b.E = force * x.S + force * p.sigma_vacc * x.V - p.gamma * x.E - p.zeta * x.E;
    b.I1 = p.gamma * x.E - (p.delta1 + p1) * x.I1 - p.zeta * x.I1;
    b.I2 = p1 * x.I1 - (p.delta2 + p.p2) * x.I2 - p.zeta * x.I2;
    b.I3 = p.p2 * x.I2 - (p.delta3 + p.mu) * x.I3 - p.zeta * x.I3;
    b.R = p.delta1 * x.I1 + p.delta2 * x.I2 + p.delta3 * x.I3 - p.zeta * x.R;
    b.D = p.mu * x.I3;
    return b;
}

/// Right-hand side with p1 taken from the hospitalization link at alpha.
template <class X, class A>
BasicState<promote_t<X, A>> drift(const BasicState<X>& x, const A& alpha, const EpidemicParams& p)
{
    return drift_with_p1(x, alpha, static_cast<const BasicRates<double>&>(p), hospitalization_rate(alpha, p.hosp_link));
}

/// Checked double overload: rejects non-finite state or alpha.
BasicState<double> drift(const CompartmentState& x, double alpha, const EpidemicParams& p);

template <class X>
BasicState<X> diffusion(const BasicState<X>& x, const NoiseIntensities& z)
{
    BasicState<X> g;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        g[k] = z.sigma[k] * x[k];
    }
    return g;
}

/// x + b * dt, clamped at zero.
template <class X, class B>
BasicState<promote_t<X, B>> euler_update(const BasicState<X>& x, const BasicState<B>& b, double dt)
{
    using nn::positive_part;
    BasicState<promote_t<X, B>> out;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        out[k] = positive_part(x[k] + b[k] * dt);
    }
    return out;
}

/// (x + b * dt) + g * sqrt(dt) * dW, clamped at zero. With dW == 0 this is euler_update bit for bit.
template <class X, class B>
BasicState<promote_t<X, B>> euler_maruyama_update(const BasicState<X>& x, const BasicState<B>& b,
                                                  const NoiseIntensities& z, double dt,
                                                  const std::array<double, kCompartments>& dW)
{
    using nn::positive_part;
    const double sq = std::sqrt(dt);
    BasicState<promote_t<X, B>> out;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        const double coeff = z.sigma[k] * sq * dW[k];
        if (coeff == 0.0) {
            out[k] = positive_part(x[k] + b[k] * dt);
        }
        else {
            out[k] = positive_part((x[k] + b[k] * dt) + coeff * x[k]);
        }
    }
    return out;
}

template <class X, class A>
BasicState<promote_t<X, A>> step_euler(const BasicState<X>& x, const A& alpha, const EpidemicParams& p, double dt)
{
    return euler_update(x, drift(x, alpha, p), dt);
}

template <class X, class A>
BasicState<promote_t<X, A>> step_euler_maruyama(const BasicState<X>& x, const A& alpha, const EpidemicParams& p,
                                                const NoiseIntensities& z, double dt,
                                                const std::array<double, kCompartments>& dW)
{
    return euler_maruyama_update(x, drift(x, alpha, p), z, dt, dW);
}

nlohmann::json to_json(const CompartmentState& x);
CompartmentState state_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const EpidemicParams& p);
EpidemicParams params_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const NoiseIntensities& z);
NoiseIntensities noise_from_json(const nlohmann::json& doc);

} // namespace vaxopt::epi
