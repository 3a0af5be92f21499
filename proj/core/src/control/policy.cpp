#include "vaxopt/control/policy.hpp"

#include "vaxopt/errors.hpp"
#include "vaxopt/io.hpp"
#include "vaxopt/nn/adam.hpp"
#include "vaxopt/parallel.hpp"
#include "vaxopt/random.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

namespace vaxopt::control {

using epi::BasicState;
using epi::CompartmentState;
using epi::kCompartments;
using nn::Tape;
using nn::Var;

PolicyNetwork::PolicyNetwork(std::vector<nn::DenseNetwork> nets, double alpha_min, double alpha_max)
    : nets_(std::move(nets)), alpha_min_(alpha_min), alpha_max_(alpha_max)
{
    if (!(alpha_min_ <= alpha_max_) || alpha_min_ < 0.0) {
        throw ConfigError("policy bounds need 0 <= alpha_min <= alpha_max");
    }
    for (const auto& net : nets_) {
        if (net.input_size() != kCompartments || net.output_size() != 1) {
            throw ShapeError("policy subnetworks map 8 inputs to 1 output");
        }
        if (net.output_activation() != nn::Activation::affine_bounded || net.bounds().lo != alpha_min_ ||
            net.bounds().hi != alpha_max_) {
            throw ConfigError("policy subnetworks need an affine-bounded output matching the policy bounds");
        }
    }
}

PolicyNetwork PolicyNetwork::initialize(std::size_t steps, const std::vector<std::size_t>& hidden, double alpha_min,
                                        double alpha_max, std::uint64_t seed)
{
    std::vector<std::size_t> sizes{kCompartments};
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(1);
    std::vector<nn::DenseNetwork> nets;
    nets.reserve(steps);
    for (std::size_t n = 0; n < steps; ++n) {
        std::mt19937_64 rng(derive_seed(seed, {0, n}));
        auto net = nn::DenseNetwork::xavier(sizes, nn::Activation::tanh, nn::Activation::affine_bounded, rng,
                                            {alpha_min, alpha_max});
        auto& w = net.weights(net.layer_count() - 1);
        std::fill(w.begin(), w.end(), 0.0);
        nets.push_back(std::move(net));
    }
    return PolicyNetwork(std::move(nets), alpha_min, alpha_max);
}

std::size_t PolicyNetwork::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& net : nets_) {
        n += net.parameter_count();
    }
    return n;
}

std::vector<double> PolicyNetwork::parameters() const
{
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for (const auto& net : nets_) {
        const auto p = net.parameters();
        flat.insert(flat.end(), p.begin(), p.end());
    }
    return flat;
}

void PolicyNetwork::set_parameters(std::span<const double> flat)
{
    if (flat.size() != parameter_count()) {
        throw ShapeError("policy parameter vector has the wrong length");
    }
    std::size_t pos = 0;
    for (auto& net : nets_) {
        const auto n = net.parameter_count();
        net.set_parameters(flat.subspan(pos, n));
        pos += n;
    }
}

nlohmann::json PolicyNetwork::to_json() const
{
    nlohmann::json nets = nlohmann::json::array();
    for (const auto& net : nets_) {
        nets.push_back(net.to_json());
    }
    return {{"alpha_min", alpha_min_}, {"alpha_max", alpha_max_}, {"networks", nets}};
}

PolicyNetwork PolicyNetwork::from_json(const nlohmann::json& doc)
{
    try {
        std::vector<nn::DenseNetwork> nets;
        for (const auto& n : doc.at("networks")) {
            nets.push_back(nn::DenseNetwork::from_json(n));
        }
        return PolicyNetwork(std::move(nets), doc.at("alpha_min").get<double>(), doc.at("alpha_max").get<double>());
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed policy: ") + e.what());
    }
    catch (const ShapeError& e) {
        throw InputError(std::string("malformed policy: ") + e.what());
    }
    catch (const ConfigError& e) {
        throw InputError(std::string("malformed policy: ") + e.what());
    }
}

double policy_rate(const PolicyNetwork& policy, std::size_t n, const CompartmentState& x)
{
    if (n >= policy.steps()) {
        throw std::out_of_range("policy step " + std::to_string(n) + " outside horizon of " +
                                std::to_string(policy.steps()));
    }
    std::array<double, kCompartments> in{};
    for (std::size_t k = 0; k < kCompartments; ++k) {
        in[k] = x[k];
    }
    return policy.subnetwork(n).forward(in)[0];
}

epi::Policy as_policy(const PolicyNetwork& policy)
{
    return [policy](std::size_t n, const CompartmentState& x) { return policy_rate(policy, n, x); };
}

void validate(const ControlConfig& cfg)
{
    if (cfg.iterations == 0) {
        throw ConfigError("iterations must be at least 1");
    }
    if (cfg.runs == 0) {
        throw ConfigError("runs must be at least 1");
    }
    if (cfg.batch_size == 0) {
        throw ConfigError("batch_size must be at least 1");
    }
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
        throw ConfigError("learning_rate must be positive");
    }
    if (!(cfg.alpha_min >= 0.0 && cfg.alpha_min <= cfg.alpha_max) || !std::isfinite(cfg.alpha_max)) {
        throw ConfigError("bounds need 0 <= alpha_min <= alpha_max");
    }
    if (cfg.hidden.empty() || std::find(cfg.hidden.begin(), cfg.hidden.end(), 0u) != cfg.hidden.end()) {
        throw ConfigError("hidden layer sizes must be positive");
    }
    if (cfg.steps == 0 || !(cfg.dt > 0.0)) {
        throw ConfigError("horizon needs steps >= 1 and dt > 0");
    }
}

nlohmann::json to_json(const ControlConfig& cfg)
{
    return {
        {"iterations", cfg.iterations},
        {"runs", cfg.runs},
        {"batch_size", cfg.batch_size},
        {"learning_rate", cfg.learning_rate},
        {"alpha_min", cfg.alpha_min},
        {"alpha_max", cfg.alpha_max},
        {"hidden", cfg.hidden},
        {"seed", cfg.seed},
        {"steps", cfg.steps},
        {"dt", cfg.dt},
        {"terminal_cost", cfg.terminal_cost},
        {"threads", cfg.threads},
    };
}

ControlConfig control_config_from_json(const nlohmann::json& doc, ControlConfig cfg)
{
    if (!doc.is_object()) {
        throw ConfigError("control config must be an object");
    }
    io::require_counts(doc, {"iterations", "runs", "batch_size", "hidden", "seed", "steps", "threads"});
    try {
        cfg.iterations = doc.value("iterations", cfg.iterations);
        cfg.runs = doc.value("runs", cfg.runs);
        cfg.batch_size = doc.value("batch_size", cfg.batch_size);
        cfg.learning_rate = doc.value("learning_rate", cfg.learning_rate);
        cfg.alpha_min = doc.value("alpha_min", cfg.alpha_min);
        cfg.alpha_max = doc.value("alpha_max", cfg.alpha_max);
        cfg.hidden = doc.value("hidden", cfg.hidden);
        cfg.seed = doc.value("seed", cfg.seed);
        cfg.steps = doc.value("steps", cfg.steps);
        cfg.dt = doc.value("dt", cfg.dt);
        cfg.terminal_cost = doc.value("terminal_cost", cfg.terminal_cost);
        cfg.threads = doc.value("threads", cfg.threads);
    }
    catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("control config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

namespace {

// Records one rollout on `tape` and returns its total cost node.
Var record_rollout(Tape& tape, const PolicyNetwork& policy, const std::vector<nn::BoundParameters>& bound,
                   const CompartmentState& x0, const epi::EpidemicParams& params, const epi::NoiseIntensities& z,
                   const cost::CostParams& cp, const ControlConfig& cfg, const epi::NoisePath& noise)
{
    BasicState<Var> x;
    for (std::size_t k = 0; k < kCompartments; ++k) {
        x[k] = tape.constant(x0[k]);
    }
    std::vector<Var> terms;
    terms.reserve(cfg.steps + 1);
    for (std::size_t n = 0; n < cfg.steps; ++n) {
        const std::array<Var, kCompartments> in{x.S, x.V, x.E, x.I1, x.I2, x.I3, x.R, x.D};
        const Var alpha = policy.subnetwork(n).forward(bound[n], in)[0];
        terms.push_back(cost::instantaneous_cost(x, alpha, cp).total() * cfg.dt);
        x = epi::step_euler_maruyama(x, alpha, params, z, cfg.dt, noise.dW[n]);
    }
    if (cfg.terminal_cost) {
        terms.push_back(cost::terminal_cost(x, cp).total() * cfg.dt);
    }
    return tape.sum(terms);
}

} // namespace

TrainResult train_policy(const CompartmentState& x0, const epi::EpidemicParams& params,
                         const epi::NoiseIntensities& z, const cost::CostParams& cp, const ControlConfig& cfg)
{
    validate(cfg);
    epi::validate(x0);
    epi::validate(params);
    cost::validate(cp);

    TrainResult result;
    result.policy = PolicyNetwork::initialize(cfg.steps, cfg.hidden, cfg.alpha_min, cfg.alpha_max, cfg.seed);
    auto& policy = result.policy;
    auto flat = policy.parameters();
    const std::size_t n_params = flat.size();
    nn::AdamState adam(n_params, {cfg.learning_rate});

    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, cfg.batch_size));
    std::vector<Tape> tapes(workers);
    std::vector<std::vector<double>> path_grads(cfg.batch_size, std::vector<double>(n_params));
    std::vector<double> path_loss(cfg.batch_size);
    std::vector<double> grads(n_params);

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        parallel_for(workers, workers, [&](std::size_t w) {
            Tape& tape = tapes[w];
            tape.clear();
            std::vector<nn::BoundParameters> bound;
            bound.reserve(cfg.steps);
            for (std::size_t n = 0; n < cfg.steps; ++n) {
                bound.push_back(policy.subnetwork(n).bind(tape));
            }
            const std::size_t floor = tape.size();
            for (std::size_t b = w; b < cfg.batch_size; b += workers) {
                const auto noise = epi::NoisePath::sample(cfg.steps, derive_seed(cfg.seed, {1, it, b}));
                const Var loss = record_rollout(tape, policy, bound, x0, params, z, cp, cfg, noise);
                path_loss[b] = loss.value();
                tape.accumulate_backward(loss, floor, 1.0);
                auto& g = path_grads[b];
                std::size_t pos = 0;
                for (const auto& bp : bound) {
                    for (const auto& v : bp.flat) {
                        g[pos++] = tape.adjoint(v);
                    }
                }
                tape.rewind(floor);
                tape.zero_adjoints();
            }
        });

        double mean = 0.0;
        std::fill(grads.begin(), grads.end(), 0.0);
        for (std::size_t b = 0; b < cfg.batch_size; ++b) {
            mean += path_loss[b];
            for (std::size_t i = 0; i < n_params; ++i) {
                grads[i] += path_grads[b][i];
            }
        }
        const double inv = 1.0 / static_cast<double>(cfg.batch_size);
        mean *= inv;
        for (auto& g : grads) {
            g *= inv;
        }
        if (!std::isfinite(mean)) {
            throw NumericalError("non-finite loss at iteration " + std::to_string(it), it);
        }
        result.loss_history.push_back(mean);
        try {
            nn::adam_step(adam, flat, grads);
        }
        catch (const NumericalError&) {
            throw NumericalError("non-finite gradient at iteration " + std::to_string(it), it);
        }
        policy.set_parameters(flat);
    }
    return result;
}

std::vector<TrainResult> train_runs(const CompartmentState& x0, const epi::EpidemicParams& params,
                                    const epi::NoiseIntensities& z, const cost::CostParams& cp,
                                    const ControlConfig& cfg)
{
    validate(cfg);
    std::vector<TrainResult> out;
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        auto run_cfg = cfg;
        run_cfg.seed = derive_seed(cfg.seed, {r});
        out.push_back(train_policy(x0, params, z, cp, run_cfg));
    }
    return out;
}

std::vector<double> alpha_path(const PolicyNetwork& policy, const CompartmentState& x0,
                               const epi::EpidemicParams& params, const epi::NoiseIntensities& z,
                               const ControlConfig& cfg, std::size_t n_paths, std::uint64_t seed)
{
    if (policy.steps() < cfg.steps) {
        throw ConfigError("policy horizon is shorter than the configured horizon");
    }
    const auto ens = epi::simulate_ensemble(x0, as_policy(policy), params, z, cfg.integrator(), n_paths, seed,
                                            cfg.threads);
    std::vector<double> alpha(cfg.steps);
    for (std::size_t n = 0; n < cfg.steps; ++n) {
        alpha[n] = policy_rate(policy, n, ens.mean.states[n]);
    }
    return alpha;
}

std::vector<double> average_policies(std::span<const std::vector<double>> paths)
{
    if (paths.empty()) {
        throw InputError("no policy runs to average");
    }
    std::vector<double> mean(paths.front().size(), 0.0);
    for (const auto& p : paths) {
        if (p.size() != mean.size()) {
            throw ShapeError("policy runs have different horizons");
        }
        for (std::size_t n = 0; n < p.size(); ++n) {
            mean[n] += p[n];
        }
    }
    if (paths.size() > 1) {
        for (auto& a : mean) {
            a /= static_cast<double>(paths.size());
        }
    }
    return mean;
}

void write_alpha_csv(std::ostream& out, std::span<const double> alpha)
{
    out << "step,alpha\n";
    for (std::size_t n = 0; n < alpha.size(); ++n) {
        out << n << ',' << io::format_g(alpha[n]) << '\n';
    }
}

} // namespace vaxopt::control
