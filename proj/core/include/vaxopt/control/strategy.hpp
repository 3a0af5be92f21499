#pragma once

#include "vaxopt/control/policy.hpp"
#include "vaxopt/cost/cost.hpp"

#include <string>
#include <variant>
#include <vector>

namespace vaxopt::control {

/// Feedback policy; several trained runs are averaged rate by rate.
struct Optimal {
    std::vector<PolicyNetwork> runs;
};

/// Observed daily rates, step n uses series[n].
struct Actual {
    std::vector<double> series;
};

struct Constant {
    double rate = 0.0;
};

struct Zero {};

using Strategy = std::variant<Optimal, Actual, Constant, Zero>;

std::string strategy_name(const Strategy& s);

/// Mean of the first `steps` entries of the actual series.
Constant constant_from_actual(const Actual& actual, std::size_t steps);

/// Throws ConfigError if the strategy cannot drive `steps` steps.
epi::Policy to_policy(const Strategy& s, std::size_t steps);

struct RolloutResult {
    epi::Trajectory mean;
    cost::ExpectedCost expected;
    std::vector<double> totals; // per path
    std::uint64_t master_seed = 0;

    double total() const { return expected.mean.total(); }
    double total_standard_error() const { return expected.total_standard_error; }
};

/// Path i uses noise seeded by epi::path_seed(master_seed, i), so strategies evaluated
/// with one master seed share their noise paths.
RolloutResult evaluate_strategy(const Strategy& strategy, const epi::CompartmentState& x0,
                                const epi::EpidemicParams& params, const epi::NoiseIntensities& z,
                                const cost::CostParams& cp, const ControlConfig& cfg, std::size_t n_paths,
                                std::uint64_t master_seed);

} // namespace vaxopt::control
