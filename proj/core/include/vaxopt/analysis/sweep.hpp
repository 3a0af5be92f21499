#pragma once

#include "vaxopt/control/policy.hpp"
#include "vaxopt/control/strategy.hpp"
#include "vaxopt/cost/cost.hpp"
#include "vaxopt/epi/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace vaxopt::analysis {

enum class SweepTarget {
    noise,              // multiplies every sigma
    infection,          // multiplies beta1, beta2, beta3
    vaccination_cost,   // multiplies c1
    economic_cost,      // multiplies c6
    hesitancy,          // multiplies alpha_max
    initial_vaccinated, // absolute V share of x0; S absorbs the difference
};

std::string to_string(SweepTarget t);
/// Throws ConfigError on an unknown name.
SweepTarget sweep_target_from_string(const std::string& name);

struct SweepSpec {
    SweepTarget target = SweepTarget::noise;
    std::vector<double> levels;
};

/// Throws ConfigError on an empty level list or a non-finite level. Levels that are
/// merely infeasible (a zero multiplier, a V share above 1) fail individually in run_sweep.
void validate(const SweepSpec& spec);
nlohmann::json to_json(const SweepSpec& spec);
SweepSpec sweep_spec_from_json(const nlohmann::json& doc);

/// Everything a level modifies, plus the rate of the constant comparison strategy.
struct Scenario {
    epi::CompartmentState x0;
    epi::EpidemicParams params;
    epi::NoiseIntensities z;
    cost::CostParams cost;
    control::ControlConfig control;
    double constant_rate = 0.0;
};

/// Base scenario with `level` applied. Throws ConfigError if the result is infeasible.
Scenario apply_level(const Scenario& base, SweepTarget target, double level);

struct LevelResult {
    double level = 0.0;
    bool ok = false;
    std::string error;                 // set when !ok
    std::vector<double> alpha;         // averaged optimal rate path
    control::RolloutResult optimal;
    control::RolloutResult constant;
    cost::CostBreakdown savings;       // constant minus optimal
};

struct SweepResult {
    SweepSpec spec;
    std::uint64_t master_seed = 0;
    std::vector<LevelResult> levels; // input order
};

/// For each level: apply it, train cfg.runs policies with seed derive_seed(master_seed, {index}),
/// then evaluate the optimal and constant strategies on eval_paths paths sharing master_seed.
/// Levels run in parallel on up to base.control.threads workers; results do not depend on
/// the thread count. A level that throws is recorded as failed and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec, const Scenario& base, std::size_t eval_paths, std::uint64_t master_seed);

/// Constant minus optimal, per component. Throws InputError unless both were evaluated
/// on the same ensemble (same master seed and path count).
cost::CostBreakdown savings_vs_constant(const control::RolloutResult& optimal, const control::RolloutResult& constant);

struct Gap {
    double lo_level = 0.0;
    double hi_level = 0.0;
    double difference = 0.0;     // total(hi) - total(lo)
    double standard_error = 0.0; // paired over common paths
};

/// Consecutive differences of the optimal totals across succeeded levels.
std::vector<Gap> optimal_total_gaps(const SweepResult& result);

/// Rollout summaries without the mean trajectory.
nlohmann::json to_json(const control::RolloutResult& r);
control::RolloutResult rollout_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SweepResult& r);
SweepResult sweep_result_from_json(const nlohmann::json& doc);

} // namespace vaxopt::analysis
