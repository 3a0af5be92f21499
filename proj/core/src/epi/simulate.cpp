#include "vaxopt/epi/simulate.hpp"

#include "vaxopt/errors.hpp"
#include "vaxopt/io.hpp"
#include "vaxopt/parallel.hpp"
#include "vaxopt/random.hpp"

#include <cmath>
#include <ostream>
#include <random>

namespace vaxopt::epi {

IntegratorConfig IntegratorConfig::from_horizon(double horizon, double dt)
{
    if (!(dt > 0.0) || !(horizon >= 0.0)) {
        throw ConfigError("integrator needs dt > 0 and horizon >= 0");
    }
    const double n = std::round(horizon / dt);
    if (std::abs(n * dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
        throw ConfigError("horizon is not a whole number of steps");
    }
    return {dt, static_cast<std::size_t>(n)};
}

NoisePath NoisePath::zeros(std::size_t steps)
{
    NoisePath n;
    n.dW.assign(steps, {});
    return n;
}

NoisePath NoisePath::sample(std::size_t steps, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    NoisePath n;
    n.dW.resize(steps);
    for (auto& row : n.dW) {
        for (auto& w : row) {
            w = normal(rng);
        }
    }
    return n;
}

Policy constant_policy(double alpha)
{
    return [alpha](std::size_t, const CompartmentState&) { return alpha; };
}

std::uint64_t path_seed(std::uint64_t master_seed, std::size_t path)
{
    return derive_seed(master_seed, {static_cast<std::uint64_t>(path)});
}

Trajectory simulate_path(const CompartmentState& x0, const Policy& policy, const EpidemicParams& p,
                         const NoiseIntensities& z, const IntegratorConfig& cfg, const NoisePath& noise)
{
    if (noise.steps() != cfg.steps) {
        throw ShapeError("noise path has " + std::to_string(noise.steps()) + " steps, integrator needs " +
                         std::to_string(cfg.steps));
    }
    Trajectory traj;
    traj.states.reserve(cfg.steps + 1);
    traj.alpha.reserve(cfg.steps);
    traj.states.push_back(x0);
    for (std::size_t n = 0; n < cfg.steps; ++n) {
        const auto& x = traj.states.back();
        const double a = policy(n, x);
        if (!std::isfinite(a) || a < 0.0) {
            throw InputError("policy returned an invalid rate at step " + std::to_string(n));
        }
        traj.alpha.push_back(a);
        traj.states.push_back(step_euler_maruyama(x, a, p, z, cfg.dt, noise.dW[n]));
    }
    return traj;
}

Trajectory simulate_ode(const CompartmentState& x0, const Policy& policy, const EpidemicParams& p,
                        const IntegratorConfig& cfg)
{
    Trajectory traj;
    traj.states.push_back(x0);
    for (std::size_t n = 0; n < cfg.steps; ++n) {
        const auto& x = traj.states.back();
        const double a = policy(n, x);
        if (!std::isfinite(a) || a < 0.0) {
            throw InputError("policy returned an invalid rate at step " + std::to_string(n));
        }
        traj.alpha.push_back(a);
        traj.states.push_back(step_euler(x, a, p, cfg.dt));
    }
    return traj;
}

EnsembleResult simulate_ensemble(const CompartmentState& x0, const Policy& policy, const EpidemicParams& p,
                                 const NoiseIntensities& z, const IntegratorConfig& cfg, std::size_t n_paths,
                                 std::uint64_t master_seed, std::size_t threads)
{
    if (n_paths == 0) {
        throw ConfigError("ensemble needs at least one path");
    }
    std::vector<Trajectory> paths(n_paths);
    parallel_for(n_paths, threads, [&](std::size_t i) {
        paths[i] = simulate_path(x0, policy, p, z, cfg, NoisePath::sample(cfg.steps, path_seed(master_seed, i)));
    });

    EnsembleResult out;
    out.mean.states.assign(cfg.steps + 1, CompartmentState{});
    out.mean.alpha.assign(cfg.steps, 0.0);
    for (const auto& tr : paths) {
        for (std::size_t n = 0; n <= cfg.steps; ++n) {
            for (std::size_t k = 0; k < kCompartments; ++k) {
                out.mean.states[n][k] += tr.states[n][k];
            }
        }
        for (std::size_t n = 0; n < cfg.steps; ++n) {
            out.mean.alpha[n] += tr.alpha[n];
        }
        out.terminal.push_back(tr.states.back());
    }
    const double inv = 1.0 / static_cast<double>(n_paths);
    for (auto& x : out.mean.states) {
        for (std::size_t k = 0; k < kCompartments; ++k) {
            x[k] *= inv;
        }
    }
    for (auto& a : out.mean.alpha) {
        a *= inv;
    }
    if (n_paths == 1) {
        out.mean = paths.front();
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj, double dt, double t0)
{
    out << "t,S,V,E,I1,I2,I3,R,D,alpha\n";
    for (std::size_t n = 0; n < traj.states.size(); ++n) {
        out << io::format_g(t0 + dt * static_cast<double>(n));
        for (std::size_t k = 0; k < kCompartments; ++k) {
            out << ',' << io::format_g(traj.states[n][k]);
        }
        out << ',';
        if (n < traj.alpha.size()) {
            out << io::format_g(traj.alpha[n]);
        }
        out << '\n';
    }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, double dt, double t0)
{
    auto out = io::open_output(path);
    write_trajectory_csv(out, traj, dt, t0);
}

} // namespace vaxopt::epi
