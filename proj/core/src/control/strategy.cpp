#include "vaxopt/control/strategy.hpp"

#include "vaxopt/errors.hpp"
#include "vaxopt/parallel.hpp"

#include <numeric>

namespace vaxopt::control {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

} // namespace

std::string strategy_name(const Strategy& s)
{
    return std::visit(Overloaded{
                          [](const Optimal&) { return std::string("optimal"); },
                          [](const Actual&) { return std::string("actual"); },
                          [](const Constant&) { return std::string("constant"); },
                          [](const Zero&) { return std::string("zero"); },
                      },
                      s);
}

Constant constant_from_actual(const Actual& actual, std::size_t steps)
{
    if (steps == 0 || actual.series.size() < steps) {
        throw ConfigError("actual series has " + std::to_string(actual.series.size()) + " rates, need " +
                          std::to_string(steps));
    }
    const double sum = std::accumulate(actual.series.begin(), actual.series.begin() + static_cast<std::ptrdiff_t>(steps), 0.0);
    return {sum / static_cast<double>(steps)};
}

epi::Policy to_policy(const Strategy& s, std::size_t steps)
{
    return std::visit(
        Overloaded{
            [steps](const Optimal& o) -> epi::Policy {
                if (o.runs.empty()) {
                    throw ConfigError("optimal strategy has no trained policy");
                }
                for (const auto& p : o.runs) {
                    if (p.steps() < steps) {
                        throw ConfigError("policy horizon is shorter than the evaluation horizon");
                    }
                }
                return [runs = o.runs](std::size_t n, const epi::CompartmentState& x) {
                    if (runs.size() == 1) {
                        return policy_rate(runs.front(), n, x);
                    }
                    double acc = 0.0;
                    for (const auto& p : runs) {
                        acc += policy_rate(p, n, x);
                    }
                    return acc / static_cast<double>(runs.size());
                };
            },
            [steps](const Actual& a) -> epi::Policy {
                if (a.series.size() < steps) {
                    throw ConfigError("actual series is shorter than the evaluation horizon");
                }
                return [series = a.series](std::size_t n, const epi::CompartmentState&) { return series[n]; };
            },
            [](const Constant& c) -> epi::Policy {
                if (!(c.rate >= 0.0)) {
                    throw ConfigError("constant rate must be non-negative");
                }
                return epi::constant_policy(c.rate);
            },
            [](const Zero&) -> epi::Policy { return epi::constant_policy(0.0); },
        },
        s);
}

RolloutResult evaluate_strategy(const Strategy& strategy, const epi::CompartmentState& x0,
                                const epi::EpidemicParams& params, const epi::NoiseIntensities& z,
                                const cost::CostParams& cp, const ControlConfig& cfg, std::size_t n_paths,
                                std::uint64_t master_seed)
{
    if (n_paths == 0) {
        throw ConfigError("evaluation needs at least one path");
    }
    const auto policy = to_policy(strategy, cfg.steps);
    const auto ic = cfg.integrator();
    std::vector<epi::Trajectory> paths(n_paths);
    std::vector<cost::CostBreakdown> costs(n_paths);
    parallel_for(n_paths, cfg.threads, [&](std::size_t i) {
        paths[i] = epi::simulate_path(x0, policy, params, z, ic,
                                      epi::NoisePath::sample(ic.steps, epi::path_seed(master_seed, i)));
        costs[i] = cost::accumulate_cost(paths[i], cp, cfg.dt, cfg.terminal_cost);
    });

    RolloutResult r;
    r.master_seed = master_seed;
    r.expected = cost::expected_cost(costs);
    for (const auto& c : costs) {
        r.totals.push_back(c.total());
    }
    r.mean.states.assign(ic.steps + 1, epi::CompartmentState{});
    r.mean.alpha.assign(ic.steps, 0.0);
    for (const auto& tr : paths) {
        for (std::size_t n = 0; n <= ic.steps; ++n) {
            for (std::size_t k = 0; k < epi::kCompartments; ++k) {
                r.mean.states[n][k] += tr.states[n][k];
            }
        }
        for (std::size_t n = 0; n < ic.steps; ++n) {
            r.mean.alpha[n] += tr.alpha[n];
        }
    }
    const double inv = 1.0 / static_cast<double>(n_paths);
    for (auto& x : r.mean.states) {
        for (std::size_t k = 0; k < epi::kCompartments; ++k) {
            x[k] *= inv;
        }
    }
    for (auto& a : r.mean.alpha) {
        a *= inv;
    }
    if (n_paths == 1) {
        r.mean = paths.front();
    }
    return r;
}

} // namespace vaxopt::control
