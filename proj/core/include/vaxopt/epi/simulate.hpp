#pragma once

#include "vaxopt/epi/model.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace vaxopt::epi {

struct IntegratorConfig {
    double dt = 1.0;
    std::size_t steps = 0;

    double horizon() const { return dt * static_cast<double>(steps); }

    /// N = T / dt; throws ConfigError unless N is a whole number.
    static IntegratorConfig from_horizon(double horizon, double dt);
};

/// Standard-normal increments, one row of 8 per step.
struct NoisePath {
    std::vector<std::array<double, kCompartments>> dW;

    std::size_t steps() const { return dW.size(); }

    static NoisePath zeros(std::size_t steps);
    static NoisePath sample(std::size_t steps, std::uint64_t seed);
};

struct Trajectory {
    std::vector<CompartmentState> states; // steps + 1
    std::vector<double> alpha;            // steps

    std::size_t steps() const { return alpha.size(); }
};

using Policy = std::function<double(std::size_t step, const CompartmentState& x)>;

Policy constant_policy(double alpha);

/// Rolls the stochastic system forward along one noise path.
/// Throws InputError if the policy emits a negative or non-finite rate.
Trajectory simulate_path(const CompartmentState& x0, const Policy& policy, const EpidemicParams& p,
                         const NoiseIntensities& z, const IntegratorConfig& cfg, const NoisePath& noise);

/// Deterministic Euler path (zero noise).
Trajectory simulate_ode(const CompartmentState& x0, const Policy& policy, const EpidemicParams& p,
                        const IntegratorConfig& cfg);

struct EnsembleResult {
    Trajectory mean;
    std::vector<CompartmentState> terminal; // one per path
};

/// Path i uses noise seeded by derive_seed(master_seed, {i}); the mean is reduced in path order.
EnsembleResult simulate_ensemble(const CompartmentState& x0, const Policy& policy, const EpidemicParams& p,
                                 const NoiseIntensities& z, const IntegratorConfig& cfg, std::size_t n_paths,
                                 std::uint64_t master_seed, std::size_t threads = 1);

std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path);

/// `t,S,V,E,I1,I2,I3,R,D,alpha`, 10 significant digits; the final row's alpha is empty
/// when the trajectory has no rate for it.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double dt, double t0 = 0.0);
void write_trajectory_csv(const std::string& path, const Trajectory& traj, double dt, double t0 = 0.0);

} // namespace vaxopt::epi
