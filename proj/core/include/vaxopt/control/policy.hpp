#pragma once

#include "vaxopt/cost/cost.hpp"
#include "vaxopt/epi/model.hpp"
#include "vaxopt/epi/simulate.hpp"
#include "vaxopt/nn/dense.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace vaxopt::control {

/// One subnetwork per time step, each mapping the 8 compartments to a rate in
/// [alpha_min, alpha_max].
class PolicyNetwork {
public:
    PolicyNetwork() = default;
    PolicyNetwork(std::vector<nn::DenseNetwork> nets, double alpha_min, double alpha_max);

    /// Hidden layers Xavier-initialized; output layer zero so every step starts at the midpoint.
    static PolicyNetwork initialize(std::size_t steps, const std::vector<std::size_t>& hidden, double alpha_min,
                                    double alpha_max, std::uint64_t seed);

    std::size_t steps() const noexcept { return nets_.size(); }
    double alpha_min() const noexcept { return alpha_min_; }
    double alpha_max() const noexcept { return alpha_max_; }
    const nn::DenseNetwork& subnetwork(std::size_t n) const { return nets_.at(n); }
    nn::DenseNetwork& subnetwork(std::size_t n) { return nets_.at(n); }

    std::size_t parameter_count() const;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

    nlohmann::json to_json() const;
    static PolicyNetwork from_json(const nlohmann::json& doc);

private:
    std::vector<nn::DenseNetwork> nets_;
    double alpha_min_ = 0.0;
    double alpha_max_ = 0.0;
};

/// Subnetwork n on x. Throws std::out_of_range for n >= steps().
double policy_rate(const PolicyNetwork& policy, std::size_t n, const epi::CompartmentState& x);

epi::Policy as_policy(const PolicyNetwork& policy);

struct ControlConfig {
    std::size_t iterations = 1000;
    std::size_t runs = 1;
    std::size_t batch_size = 16;
    double learning_rate = 1e-3;
    double alpha_min = 0.0;
    double alpha_max = 0.03;
    std::vector<std::size_t> hidden = {32, 32, 32};
    std::uint64_t seed = 1;
    std::size_t steps = 60;
    double dt = 1.0;
    /// Charge the state-only cost of the final state (times dt) in training and evaluation.
    bool terminal_cost = false;
    std::size_t threads = 1;

    epi::IntegratorConfig integrator() const { return {dt, steps}; }
};

void validate(const ControlConfig& cfg);
nlohmann::json to_json(const ControlConfig& cfg);
ControlConfig control_config_from_json(const nlohmann::json& doc, ControlConfig base = {});

struct TrainResult {
    PolicyNetwork policy;
    std::vector<double> loss_history; // batch-mean total cost per iteration
};

/// Pathwise-gradient training: each iteration draws batch_size noise paths, rolls the
/// SDE forward under the policy, and takes one Adam step on the batch-mean cost.
/// Path b of iteration i uses noise seed derive_seed(seed, {1, i, b}).
/// Throws NumericalError with the iteration index on a non-finite loss.
TrainResult train_policy(const epi::CompartmentState& x0, const epi::EpidemicParams& params,
                         const epi::NoiseIntensities& z, const cost::CostParams& cp, const ControlConfig& cfg);

/// cfg.runs independent trainings; run r uses seed derive_seed(cfg.seed, {r}).
std::vector<TrainResult> train_runs(const epi::CompartmentState& x0, const epi::EpidemicParams& params,
                                    const epi::NoiseIntensities& z, const cost::CostParams& cp,
                                    const ControlConfig& cfg);

/// Rate path of a policy evaluated along the mean trajectory of its own ensemble.
std::vector<double> alpha_path(const PolicyNetwork& policy, const epi::CompartmentState& x0,
                               const epi::EpidemicParams& params, const epi::NoiseIntensities& z,
                               const ControlConfig& cfg, std::size_t n_paths, std::uint64_t seed);

/// Step-wise arithmetic mean. Throws InputError on an empty set, ShapeError on ragged paths.
std::vector<double> average_policies(std::span<const std::vector<double>> paths);

/// `step,alpha`
void write_alpha_csv(std::ostream& out, std::span<const double> alpha);

} // namespace vaxopt::control
