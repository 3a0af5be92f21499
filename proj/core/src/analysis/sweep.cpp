#include "vaxopt/analysis/sweep.hpp"

#include "vaxopt/errors.hpp"
#include "vaxopt/parallel.hpp"
#include "vaxopt/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

namespace vaxopt::analysis {

namespace {

constexpr std::array<std::pair<SweepTarget, const char*>, 6> kTargetNames = {{
    {SweepTarget::noise, "noise"},
    {SweepTarget::infection, "infection"},
    {SweepTarget::vaccination_cost, "vaccination_cost"},
    {SweepTarget::economic_cost, "economic_cost"},
    {SweepTarget::hesitancy, "hesitancy"},
    {SweepTarget::initial_vaccinated, "initial_vaccinated"},
}};

void require_multiplier(double level)
{
    if (!(level > 0.0)) {
        throw ConfigError("multiplier must be positive, got " + std::to_string(level));
    }
}

cost::CostBreakdown breakdown_from_json(const nlohmann::json& doc)
{
    return {doc.at("vaccination").get<double>(), doc.at("quarantine").get<double>(),
            doc.at("healthcare").get<double>(), doc.at("economic").get<double>()};
}

LevelResult run_level(const SweepSpec& spec, std::size_t index, const Scenario& base, std::size_t eval_paths,
                      std::uint64_t master_seed, std::size_t threads)
{
    LevelResult out;
    out.level = spec.levels[index];
    try {
        const auto sc = apply_level(base, spec.target, out.level);
        auto cfg = sc.control;
        cfg.seed = derive_seed(master_seed, {index});
        cfg.threads = threads;
        const auto trained = control::train_runs(sc.x0, sc.params, sc.z, sc.cost, cfg);

        control::Optimal optimal;
        std::vector<std::vector<double>> paths;
        for (const auto& t : trained) {
            optimal.runs.push_back(t.policy);
            paths.push_back(control::alpha_path(t.policy, sc.x0, sc.params, sc.z, cfg, eval_paths, master_seed));
        }
        out.alpha = control::average_policies(paths);
        out.optimal = control::evaluate_strategy(optimal, sc.x0, sc.params, sc.z, sc.cost, cfg, eval_paths,
                                                 master_seed);
        out.constant = control::evaluate_strategy(control::Constant{sc.constant_rate}, sc.x0, sc.params, sc.z,
                                                  sc.cost, cfg, eval_paths, master_seed);
        out.savings = savings_vs_constant(out.optimal, out.constant);
        out.ok = true;
    }
    catch (const std::exception& e) {
        out = LevelResult{};
        out.level = spec.levels[index];
        out.error = e.what();
    }
    return out;
}

} // namespace

std::string to_string(SweepTarget t)
{
    for (const auto& [target, name] : kTargetNames) {
        if (target == t) {
            return name;
        }
    }
    return "noise";
}

SweepTarget sweep_target_from_string(const std::string& name)
{
    for (const auto& [target, n] : kTargetNames) {
        if (name == n) {
            return target;
        }
    }
    throw ConfigError("unknown sweep target '" + name + "'");
}

void validate(const SweepSpec& spec)
{
    if (spec.levels.empty()) {
        throw ConfigError("sweep '" + to_string(spec.target) + "' has no levels");
    }
    for (double l : spec.levels) {
        if (!std::isfinite(l)) {
            throw ConfigError("sweep levels must be finite");
        }
    }
}

nlohmann::json to_json(const SweepSpec& spec)
{
    return {{"target", to_string(spec.target)}, {"levels", spec.levels}};
}

SweepSpec sweep_spec_from_json(const nlohmann::json& doc)
{
    SweepSpec spec;
    try {
        spec.target = sweep_target_from_string(doc.at("target").get<std::string>());
        spec.levels = doc.at("levels").get<std::vector<double>>();
    }
    catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed sweep: ") + e.what());
    }
    validate(spec);
    return spec;
}

Scenario apply_level(const Scenario& base, SweepTarget target, double level)
{
    if (!std::isfinite(level)) {
        throw ConfigError("level must be finite");
    }
    Scenario sc = base;
    switch (target) {
    case SweepTarget::noise:
        require_multiplier(level);
        sc.z = epi::scaled(base.z, level);
        break;
    case SweepTarget::infection:
        require_multiplier(level);
        sc.params.beta1 *= level;
        sc.params.beta2 *= level;
        sc.params.beta3 *= level;
        epi::validate(sc.params);
        break;
    case SweepTarget::vaccination_cost:
        require_multiplier(level);
        sc.cost.c1 *= level;
        break;
    case SweepTarget::economic_cost:
        require_multiplier(level);
        sc.cost.c6 *= level;
        break;
    case SweepTarget::hesitancy:
        require_multiplier(level);
        sc.control.alpha_max *= level;
        if (!(sc.control.alpha_max > sc.control.alpha_min)) {
            throw ConfigError("alpha_max falls to or below alpha_min");
        }
        sc.constant_rate = std::clamp(sc.constant_rate, sc.control.alpha_min, sc.control.alpha_max);
        break;
    case SweepTarget::initial_vaccinated: {
        if (level < 0.0 || level > 1.0) {
            throw ConfigError("vaccinated share must lie in [0, 1], got " + std::to_string(level));
        }
        const double s = base.x0.S + base.x0.V - level;
        if (s < 0.0) {
            throw ConfigError("vaccinated share " + std::to_string(level) + " leaves no susceptible population");
        }
        sc.x0.S = s;
        sc.x0.V = level;
        epi::validate(sc.x0);
        break;
    }
    }
    control::validate(sc.control);
    return sc;
}

SweepResult run_sweep(const SweepSpec& spec, const Scenario& base, std::size_t eval_paths, std::uint64_t master_seed)
{
    validate(spec);
    if (eval_paths == 0) {
        throw ConfigError("sweep needs at least one evaluation path");
    }
    SweepResult result;
    result.spec = spec;
    result.master_seed = master_seed;
    result.levels.resize(spec.levels.size());
    const std::size_t n = spec.levels.size();
    const std::size_t outer = std::max<std::size_t>(1, std::min(base.control.threads, n));
    const std::size_t inner = std::max<std::size_t>(1, base.control.threads / outer);
    parallel_for(n, outer, [&](std::size_t i) {
        result.levels[i] = run_level(spec, i, base, eval_paths, master_seed, inner);
    });
    return result;
}

cost::CostBreakdown savings_vs_constant(const control::RolloutResult& optimal, const control::RolloutResult& constant)
{
    if (optimal.master_seed != constant.master_seed || optimal.expected.n != constant.expected.n) {
        throw InputError("savings need both strategies evaluated on the same noise ensemble");
    }
    return constant.expected.mean + optimal.expected.mean * -1.0;
}

std::vector<Gap> optimal_total_gaps(const SweepResult& result)
{
    std::vector<const LevelResult*> ok;
    for (const auto& l : result.levels) {
        if (l.ok) {
            ok.push_back(&l);
        }
    }
    std::vector<Gap> gaps;
    for (std::size_t i = 1; i < ok.size(); ++i) {
        const auto& lo = *ok[i - 1];
        const auto& hi = *ok[i];
        gaps.push_back({lo.level, hi.level, hi.optimal.total() - lo.optimal.total(),
                        cost::paired_standard_error(lo.optimal.totals, hi.optimal.totals)});
    }
    return gaps;
}

nlohmann::json to_json(const control::RolloutResult& r)
{
    return {{"mean", cost::to_json(r.expected.mean)},
            {"standard_error", cost::to_json(r.expected.standard_error)},
            {"total_standard_error", r.expected.total_standard_error},
            {"n", r.expected.n},
            {"master_seed", r.master_seed},
            {"totals", r.totals}};
}

control::RolloutResult rollout_from_json(const nlohmann::json& doc)
{
    control::RolloutResult r;
    try {
        r.expected.mean = breakdown_from_json(doc.at("mean"));
        r.expected.standard_error = breakdown_from_json(doc.at("standard_error"));
        r.expected.total_standard_error = doc.at("total_standard_error").get<double>();
        r.expected.n = doc.at("n").get<std::size_t>();
        r.master_seed = doc.at("master_seed").get<std::uint64_t>();
        r.totals = doc.at("totals").get<std::vector<double>>();
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed rollout summary: ") + e.what());
    }
    return r;
}

nlohmann::json to_json(const SweepResult& r)
{
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& l : r.levels) {
        nlohmann::json j = {{"level", l.level}, {"ok", l.ok}};
        if (l.ok) {
            j["alpha"] = l.alpha;
            j["optimal"] = to_json(l.optimal);
            j["constant"] = to_json(l.constant);
            j["savings"] = cost::to_json(l.savings);
        }
        else {
            j["error"] = l.error;
        }
        levels.push_back(std::move(j));
    }
    return {{"spec", to_json(r.spec)}, {"master_seed", r.master_seed}, {"levels", std::move(levels)}};
}

SweepResult sweep_result_from_json(const nlohmann::json& doc)
{
    SweepResult r;
    try {
        r.spec = sweep_spec_from_json(doc.at("spec"));
        r.master_seed = doc.at("master_seed").get<std::uint64_t>();
        for (const auto& j : doc.at("levels")) {
            LevelResult l;
            l.level = j.at("level").get<double>();
            l.ok = j.at("ok").get<bool>();
            if (l.ok) {
                l.alpha = j.at("alpha").get<std::vector<double>>();
                l.optimal = rollout_from_json(j.at("optimal"));
                l.constant = rollout_from_json(j.at("constant"));
                l.savings = breakdown_from_json(j.at("savings"));
            }
            else {
                l.error = j.value("error", std::string());
            }
            r.levels.push_back(std::move(l));
        }
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed sweep result: ") + e.what());
    }
    catch (const ConfigError& e) {
        throw InputError(std::string("malformed sweep result: ") + e.what());
    }
    return r;
}

} // namespace vaxopt::analysis
