#include "vaxopt/calib/calibrate.hpp"
#include "vaxopt/control/policy.hpp"
#include "vaxopt/control/strategy.hpp"
#include "vaxopt/cost/cost.hpp"
#include "vaxopt/epi/model.hpp"
#include "vaxopt/epi/simulate.hpp"
#include "vaxopt/ingest/series.hpp"
#include "vaxopt/nn/dense.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace vaxopt;

namespace {

ingest::CompartmentSeries synthetic_series(std::size_t days)
{
    const auto traj = epi::simulate_ode(epi::baseline_train_state(), epi::constant_policy(0.01),
                                        epi::baseline_params(), {1.0, days - 1});
    ingest::CompartmentSeries s;
    s.population = 6555000.0;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        s.t.push_back(static_cast<double>(i));
        s.states.push_back(traj.states[i]);
        s.alpha_obs.push_back(0.01);
    }
    return s;
}

} // namespace

static void BM_Drift(benchmark::State& st)
{
    const auto x = epi::baseline_train_state();
    const auto p = epi::baseline_params();
    for (auto _ : st) {
        benchmark::DoNotOptimize(epi::drift(x, 0.01, p));
    }
}
BENCHMARK(BM_Drift);

static void BM_SimulatePath60(benchmark::State& st)
{
    const auto x = epi::baseline_train_state();
    const auto p = epi::baseline_params();
    const auto z = epi::baseline_noise();
    const auto noise = epi::NoisePath::sample(60, 7);
    const auto policy = epi::constant_policy(0.01);
    for (auto _ : st) {
        benchmark::DoNotOptimize(epi::simulate_path(x, policy, p, z, {1.0, 60}, noise));
    }
}
BENCHMARK(BM_SimulatePath60);

static void BM_Ensemble(benchmark::State& st)
{
    const auto n = static_cast<std::size_t>(st.range(0));
    const auto threads = static_cast<std::size_t>(st.range(1));
    for (auto _ : st) {
        benchmark::DoNotOptimize(epi::simulate_ensemble(epi::baseline_train_state(), epi::constant_policy(0.01),
                                                        epi::baseline_params(), epi::baseline_noise(), {1.0, 60}, n,
                                                        3, threads));
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_Ensemble)->Args({1000, 1})->Args({1000, 4})->Unit(benchmark::kMillisecond);

static void BM_DenseForwardBackward(benchmark::State& st)
{
    std::mt19937_64 rng(1);
    const auto net = nn::DenseNetwork::xavier({8, 32, 32, 32, 1}, nn::Activation::tanh, nn::Activation::sigmoid, rng);
    std::vector<double> in(8, 0.1);
    nn::Tape tape;
    for (auto _ : st) {
        tape.clear();
        const auto bp = net.bind(tape);
        std::vector<nn::Var> x;
        for (double v : in) {
            x.push_back(tape.input(v));
        }
        const auto out = net.forward(bp, x);
        tape.backward(out[0]);
        benchmark::DoNotOptimize(tape.adjoint(bp.flat[0]));
    }
}
BENCHMARK(BM_DenseForwardBackward);

static void BM_CalibrationEpochs(benchmark::State& st)
{
    const auto series = synthetic_series(61);
    calib::CalibrationConfig cfg;
    cfg.epochs = 10;
    cfg.log_every = 10;
    const bool stochastic = st.range(0) != 0;
    for (auto _ : st) {
        benchmark::DoNotOptimize(stochastic ? calib::fit_stochastic(series, cfg) : calib::fit_deterministic(series, cfg));
    }
    st.SetItemsProcessed(st.iterations() * 10);
}
BENCHMARK(BM_CalibrationEpochs)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_ControlIterations(benchmark::State& st)
{
    control::ControlConfig cfg;
    cfg.iterations = 5;
    cfg.batch_size = 32;
    cfg.alpha_min = 0.004;
    cfg.threads = static_cast<std::size_t>(st.range(0));
    for (auto _ : st) {
        benchmark::DoNotOptimize(control::train_policy(epi::baseline_train_state(), epi::baseline_params(),
                                                       epi::baseline_noise(), cost::CostParams{}, cfg));
    }
    st.SetItemsProcessed(st.iterations() * 5);
}
BENCHMARK(BM_ControlIterations)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

static void BM_EvaluateStrategy(benchmark::State& st)
{
    control::ControlConfig cfg;
    for (auto _ : st) {
        benchmark::DoNotOptimize(control::evaluate_strategy(control::Constant{0.012}, epi::baseline_train_state(),
                                                            epi::baseline_params(), epi::baseline_noise(),
                                                            cost::CostParams{}, cfg, 500, 99));
    }
}
BENCHMARK(BM_EvaluateStrategy)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
