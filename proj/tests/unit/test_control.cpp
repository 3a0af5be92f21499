#include "vaxopt/control/policy.hpp"
#include "vaxopt/control/strategy.hpp"
#include "vaxopt/errors.hpp"
#include "vaxopt/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace vaxopt;
using namespace vaxopt::control;
using epi::CompartmentState;

namespace {

ControlConfig small_control(std::size_t steps, std::size_t iterations)
{
    ControlConfig cfg;
    cfg.steps = steps;
    cfg.iterations = iterations;
    cfg.batch_size = 4;
    cfg.hidden = {5, 4};
    cfg.alpha_min = 0.004;
    cfg.alpha_max = 0.03;
    cfg.seed = 17;
    return cfg;
}

void randomize(PolicyNetwork& policy, std::uint64_t seed, double scale)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, scale);
    auto flat = policy.parameters();
    for (auto& v : flat) {
        v = nd(rng);
    }
    policy.set_parameters(flat);
}

// Direct matrix evaluation of one tanh subnetwork with an affine-bounded output.
double reference_rate(const nn::DenseNetwork& net, const CompartmentState& x)
{
    std::vector<double> h(8);
    for (std::size_t k = 0; k < 8; ++k) {
        h[k] = x[k];
    }
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const auto in = net.sizes()[l], out = net.sizes()[l + 1];
        std::vector<double> next(out);
        for (std::size_t j = 0; j < out; ++j) {
            double z = net.biases(l)[j];
            for (std::size_t i = 0; i < in; ++i) {
                z += net.weights(l)[j * in + i] * h[i];
            }
            next[j] = l + 1 == net.layer_count()
                          ? net.bounds().lo + (net.bounds().hi - net.bounds().lo) / (1.0 + std::exp(-z))
                          : std::tanh(z);
        }
        h = next;
    }
    return h[0];
}

double rollout_cost(const PolicyNetwork& policy, const ControlConfig& cfg, const epi::NoisePath& noise)
{
    const auto traj = epi::simulate_path(epi::baseline_train_state(), as_policy(policy), epi::baseline_params(),
                                         epi::baseline_noise(), cfg.integrator(), noise);
    return cost::accumulate_cost(traj, cost::CostParams{}, cfg.dt, cfg.terminal_cost).total();
}

} // namespace

TEST(PolicyNetwork, FreshPolicyReturnsMidpoint)
{
    const auto policy = PolicyNetwork::initialize(6, {8, 8, 8}, 0.004, 0.03, 1);
    EXPECT_EQ(policy.steps(), 6u);
    for (std::size_t n = 0; n < 6; ++n) {
        EXPECT_DOUBLE_EQ(policy_rate(policy, n, epi::baseline_train_state()), 0.017);
    }
}

TEST(PolicyNetwork, OutputWithinBoundsForRandomStates)
{
    auto policy = PolicyNetwork::initialize(3, {6, 6}, 0.004, 0.03, 2);
    randomize(policy, 3, 3.0);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 10000; ++i) {
        CompartmentState x;
        for (std::size_t k = 0; k < 8; ++k) {
            x[k] = u(rng);
        }
        for (std::size_t n = 0; n < 3; ++n) {
            const double a = policy_rate(policy, n, x);
            ASSERT_GE(a, 0.004);
            ASSERT_LE(a, 0.03);
        }
    }
}

TEST(PolicyNetwork, MatchesDirectEvaluation)
{
    auto policy = PolicyNetwork::initialize(4, {7, 5, 3}, 0.0, 0.02, 5);
    randomize(policy, 6, 0.8);
    const auto x = epi::baseline_test_state();
    for (std::size_t n = 0; n < 4; ++n) {
        EXPECT_NEAR(policy_rate(policy, n, x), reference_rate(policy.subnetwork(n), x), 1e-15);
    }
}

TEST(PolicyNetwork, RejectsStepOutsideHorizon)
{
    const auto policy = PolicyNetwork::initialize(2, {3}, 0.0, 0.01, 1);
    EXPECT_THROW(policy_rate(policy, 2, epi::baseline_train_state()), std::out_of_range);
}

TEST(PolicyNetwork, JsonRoundTrip)
{
    auto policy = PolicyNetwork::initialize(3, {4}, 0.001, 0.02, 8);
    randomize(policy, 9, 1.0);
    const auto back = PolicyNetwork::from_json(policy.to_json());
    EXPECT_EQ(back.parameters(), policy.parameters());
    EXPECT_EQ(back.alpha_min(), 0.001);
    EXPECT_EQ(back.alpha_max(), 0.02);
    EXPECT_THROW(PolicyNetwork::from_json({{"alpha_min", 0}, {"alpha_max", 1}}), InputError);
}

TEST(PolicyNetwork, RejectsInvertedBounds)
{
    EXPECT_THROW(PolicyNetwork::initialize(1, {2}, 0.03, 0.01, 1), ConfigError);
}

TEST(ControlConfig, JsonRoundTripAndValidation)
{
    auto cfg = small_control(7, 9);
    cfg.terminal_cost = true;
    const auto back = control_config_from_json(to_json(cfg));
    EXPECT_EQ(back.steps, 7u);
    EXPECT_EQ(back.iterations, 9u);
    EXPECT_TRUE(back.terminal_cost);
    EXPECT_EQ(back.hidden, cfg.hidden);
    EXPECT_THROW(control_config_from_json({{"iterations", 0}}), ConfigError);
    EXPECT_THROW(control_config_from_json({{"alpha_min", 0.5}, {"alpha_max", 0.1}}), ConfigError);
    EXPECT_THROW(control_config_from_json({{"runs", 0}}), ConfigError);
}

TEST(TrainPolicy, FirstStepFollowsGradientSign)
{
    // One Adam step moves each parameter by about -lr * sign(gradient).
    auto cfg = small_control(4, 1);
    cfg.batch_size = 2;
    const auto x0 = epi::baseline_train_state();
    const auto result = train_policy(x0, epi::baseline_params(), epi::baseline_noise(), cost::CostParams{}, cfg);
    const auto init = PolicyNetwork::initialize(cfg.steps, cfg.hidden, cfg.alpha_min, cfg.alpha_max, cfg.seed);
    const auto p0 = init.parameters(), p1 = result.policy.parameters();

    std::vector<epi::NoisePath> noise;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
        noise.push_back(epi::NoisePath::sample(cfg.steps, derive_seed(cfg.seed, {1, 0, b})));
    }
    const auto batch_loss = [&](const std::vector<double>& flat) {
        auto pol = init;
        pol.set_parameters(flat);
        double acc = 0.0;
        for (const auto& nz : noise) {
            acc += rollout_cost(pol, cfg, nz);
        }
        return acc / static_cast<double>(noise.size());
    };
    EXPECT_NEAR(result.loss_history.at(0), batch_loss(p0), 1e-12);

    std::size_t checked = 0;
    for (std::size_t i = 0; i < p0.size(); ++i) {
        auto up = p0, dn = p0;
        const double h = 1e-6;
        up[i] += h;
        dn[i] -= h;
        const double fd = (batch_loss(up) - batch_loss(dn)) / (2 * h);
        if (std::abs(fd) < 1e-4) {
            continue;
        }
        const double step = p1[i] - p0[i];
        EXPECT_NEAR(step, -cfg.learning_rate * (fd > 0 ? 1.0 : -1.0), 1e-6) << "parameter " << i;
        ++checked;
    }
    EXPECT_GT(checked, 10u);
}

TEST(TrainPolicy, ReproducibleAndThreadIndependent)
{
    auto cfg = small_control(5, 20);
    const auto x0 = epi::baseline_train_state();
    const auto a = train_policy(x0, epi::baseline_params(), epi::baseline_noise(), cost::CostParams{}, cfg);
    const auto b = train_policy(x0, epi::baseline_params(), epi::baseline_noise(), cost::CostParams{}, cfg);
    cfg.threads = 3;
    const auto c = train_policy(x0, epi::baseline_params(), epi::baseline_noise(), cost::CostParams{}, cfg);
    EXPECT_EQ(a.policy.parameters(), b.policy.parameters());
    EXPECT_EQ(a.policy.parameters(), c.policy.parameters());
    EXPECT_EQ(a.loss_history, c.loss_history);
    EXPECT_EQ(a.loss_history.size(), 20u);
}

TEST(TrainPolicy, LossDecreasesWithoutNoise)
{
    auto cfg = small_control(10, 1000);
    cfg.batch_size = 2;
    const auto r = train_policy(epi::baseline_train_state(), epi::baseline_params(), epi::NoiseIntensities{},
                                cost::CostParams{}, cfg);
    const auto& h = r.loss_history;
    double lead = 0.0, trail = 0.0;
    for (std::size_t i = 0; i < 500; ++i) {
        lead += h[i];
        trail += h[h.size() - 1 - i];
    }
    EXPECT_LE(trail, lead);
}

TEST(TrainPolicy, RejectsNonFiniteLoss)
{
    auto x0 = epi::baseline_train_state();
    auto p = epi::baseline_params();
    p.beta1 = 1e308;
    try {
        train_policy(x0, p, epi::baseline_noise(), cost::CostParams{}, small_control(10, 5));
        FAIL() << "expected NumericalError";
    }
    catch (const NumericalError& e) {
        EXPECT_EQ(e.index(), 0u);
    }
}

TEST(TrainRuns, SeedsDiffer)
{
    auto cfg = small_control(3, 2);
    cfg.runs = 2;
    const auto runs = train_runs(epi::baseline_train_state(), epi::baseline_params(), epi::baseline_noise(),
                                 cost::CostParams{}, cfg);
    ASSERT_EQ(runs.size(), 2u);
    EXPECT_NE(runs[0].policy.parameters(), runs[1].policy.parameters());
}

TEST(AveragePolicies, IdentityCases)
{
    const std::vector<double> a{0.03, 0.02, 0.01};
    const std::vector<std::vector<double>> one{a}, two{a, a};
    EXPECT_EQ(average_policies(one), a);
    EXPECT_EQ(average_policies(two), a);
}

TEST(AveragePolicies, MeanAndErrors)
{
    const std::vector<std::vector<double>> runs{{0.0, 0.02}, {0.01, 0.04}};
    const auto m = average_policies(runs);
    EXPECT_DOUBLE_EQ(m[0], 0.005);
    EXPECT_DOUBLE_EQ(m[1], 0.03);
    EXPECT_THROW(average_policies(std::vector<std::vector<double>>{}), InputError);
    const std::vector<std::vector<double>> ragged{{0.0}, {0.0, 1.0}};
    EXPECT_THROW(average_policies(ragged), ShapeError);
}

TEST(AlphaPath, FreshPolicyIsFlatMidpoint)
{
    const auto cfg = small_control(6, 1);
    const auto policy = PolicyNetwork::initialize(6, {3}, cfg.alpha_min, cfg.alpha_max, 2);
    const auto path = alpha_path(policy, epi::baseline_train_state(), epi::baseline_params(), epi::baseline_noise(),
                                 cfg, 10, 1);
    ASSERT_EQ(path.size(), 6u);
    for (double a : path) {
        EXPECT_DOUBLE_EQ(a, 0.017);
    }
}

TEST(AlphaCsv, Format)
{
    std::ostringstream out;
    const std::vector<double> a{0.03, 0.0125};
    write_alpha_csv(out, a);
    EXPECT_EQ(out.str(), "step,alpha\n0,0.03\n1,0.0125\n");
}

TEST(Strategy, NamesAndConstantFromActual)
{
    EXPECT_EQ(strategy_name(Zero{}), "zero");
    EXPECT_EQ(strategy_name(Actual{}), "actual");
    EXPECT_EQ(strategy_name(Constant{}), "constant");
    EXPECT_EQ(strategy_name(Optimal{}), "optimal");
    const Actual a{{0.01, 0.02, 0.03, 0.5}};
    EXPECT_DOUBLE_EQ(constant_from_actual(a, 3).rate, 0.02);
    EXPECT_THROW(constant_from_actual(a, 5), ConfigError);
    EXPECT_THROW(to_policy(a, 5), ConfigError);
    EXPECT_THROW(to_policy(Optimal{}, 1), ConfigError);
}

TEST(EvaluateStrategy, ZeroHasNoVaccinationCost)
{
    const auto cfg = small_control(20, 1);
    const auto r = evaluate_strategy(Zero{}, epi::baseline_train_state(), epi::baseline_params(),
                                     epi::baseline_noise(), cost::CostParams{}, cfg, 50, 3);
    EXPECT_EQ(r.expected.mean.vaccination, 0.0);
    EXPECT_EQ(r.totals.size(), 50u);
}

TEST(EvaluateStrategy, ConstantWithoutNoiseMatchesOde)
{
    const auto cfg = small_control(30, 1);
    const auto x0 = epi::baseline_train_state();
    const auto p = epi::baseline_params();
    const auto r = evaluate_strategy(Constant{0.01}, x0, p, epi::NoiseIntensities{}, cost::CostParams{}, cfg, 20, 3);
    const auto ode = epi::simulate_ode(x0, epi::constant_policy(0.01), p, cfg.integrator());
    const auto expected = cost::accumulate_cost(ode, cost::CostParams{}, cfg.dt);
    EXPECT_NEAR(r.total(), expected.total(), 1e-12);
    EXPECT_NEAR(r.total_standard_error(), 0.0, 1e-12);
}

TEST(EvaluateStrategy, ExpectedTotalIsMeanOfPathTotals)
{
    const auto cfg = small_control(15, 1);
    const auto r = evaluate_strategy(Constant{0.02}, epi::baseline_train_state(), epi::baseline_params(),
                                     epi::baseline_noise(), cost::CostParams{}, cfg, 40, 8);
    double mean = 0.0;
    for (double t : r.totals) {
        mean += t;
    }
    mean /= 40.0;
    EXPECT_NEAR(r.total(), mean, 1e-9 * std::abs(mean));
}

TEST(EvaluateStrategy, CommonRandomNumbers)
{
    auto cfg = small_control(15, 1);
    const auto x0 = epi::baseline_train_state();
    const auto p = epi::baseline_params();
    const auto z = epi::baseline_noise();
    const auto a = evaluate_strategy(Constant{0.02}, x0, p, z, cost::CostParams{}, cfg, 30, 11);
    const auto b = evaluate_strategy(Actual{std::vector<double>(15, 0.02)}, x0, p, z, cost::CostParams{}, cfg, 30, 11);
    EXPECT_EQ(a.totals, b.totals);
    cfg.threads = 4;
    const auto c = evaluate_strategy(Constant{0.02}, x0, p, z, cost::CostParams{}, cfg, 30, 11);
    EXPECT_EQ(a.totals, c.totals);
    EXPECT_EQ(a.mean.states, c.mean.states);
    const auto d = evaluate_strategy(Constant{0.02}, x0, p, z, cost::CostParams{}, cfg, 30, 12);
    EXPECT_NE(a.totals, d.totals);
}

TEST(EvaluateStrategy, OptimalAveragesRuns)
{
    const auto cfg = small_control(5, 1);
    auto p1 = PolicyNetwork::initialize(5, {3}, cfg.alpha_min, cfg.alpha_max, 1);
    auto p2 = p1;
    randomize(p2, 4, 2.0);
    const auto pol = to_policy(Optimal{{p1, p2}}, 5);
    const auto x = epi::baseline_train_state();
    EXPECT_NEAR(pol(2, x), 0.5 * (policy_rate(p1, 2, x) + policy_rate(p2, 2, x)), 1e-15);
}

TEST(PairedStandardError, KnownValues)
{
    const std::vector<double> a{1, 2, 3, 4}, b{2, 3, 4, 5}, c{2, 4, 3, 7};
    EXPECT_EQ(cost::paired_standard_error(a, b), 0.0);
    // differences 1, 2, 0, 3: mean 1.5, sample variance 5/3
    EXPECT_NEAR(cost::paired_standard_error(a, c), std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_THROW(cost::paired_standard_error(a, std::vector<double>{1.0}), ShapeError);
}
