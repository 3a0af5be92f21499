// Acceptance checks, one pass/fail line per criterion.
//
//   vaxopt_acceptance               run all
//   vaxopt_acceptance --criterion 7 run one

#include "pipeline.hpp"

#include "vaxopt/analysis/sweep.hpp"
#include "vaxopt/calib/calibrate.hpp"
#include "vaxopt/control/strategy.hpp"
#include "vaxopt/epi/simulate.hpp"
#include "vaxopt/ingest/flows.hpp"
#include "vaxopt/ingest/records.hpp"
#include "vaxopt/ingest/series.hpp"
#include "vaxopt/nn/dense.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace vaxopt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string details;
};

struct Criterion {
    int id;
    const char* name;
    double limit_seconds; // 0: none
    std::function<Outcome()> check;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

double hump(std::size_t n)
{
    const double u = (static_cast<double>(n) - 12.0) / 12.0;
    return 0.004 + 0.026 * std::exp(-u * u);
}

epi::Policy hump_policy()
{
    return [](std::size_t n, const epi::CompartmentState&) { return hump(n); };
}

// 1 -----------------------------------------------------------------------------

Outcome conservation()
{
    const auto p = epi::baseline_params();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 100000; ++trial) {
        epi::CompartmentState x;
        double s = 0.0;
        for (std::size_t k = 0; k < epi::kCompartments; ++k) {
            x[k] = u(rng);
            s += x[k];
        }
        for (std::size_t k = 0; k < epi::kCompartments; ++k) {
            x[k] /= s;
        }
        const double alpha = 0.1 * u(rng);
        const auto b = epi::drift(x, alpha, p);
        double sum = 0.0;
        for (std::size_t k = 0; k < epi::kCompartments; ++k) {
            sum += b[k];
        }
        const double alive = x.S + x.V + x.E + x.I1 + x.I2 + x.I3 + x.R;
        worst = std::max(worst, std::abs(sum - (p.lambda - p.zeta * alive)));
    }
    return {worst <= 1e-12, fmt("max |sum b - (lambda - zeta N)| = %.3g over 1e5 pairs (limit 1e-12)", worst)};
}

// 2 -----------------------------------------------------------------------------

Outcome zero_noise()
{
    const auto x0 = epi::baseline_train_state();
    const auto p = epi::baseline_params();
    const epi::IntegratorConfig ic{1.0, 60};
    const auto ode = epi::simulate_ode(x0, hump_policy(), p, ic);
    const auto sde = epi::simulate_path(x0, hump_policy(), p, epi::NoiseIntensities{}, ic, epi::NoisePath::sample(60, 17));
    std::size_t mismatches = 0;
    for (std::size_t n = 0; n < ode.states.size(); ++n) {
        if (!(ode.states[n] == sde.states[n])) {
            ++mismatches;
        }
    }
    return {mismatches == 0 && ode.alpha == sde.alpha,
            fmt("%zu of %zu states differ bitwise", mismatches, ode.states.size())};
}

// 3 -----------------------------------------------------------------------------

Outcome ensemble()
{
    const auto x0 = epi::baseline_train_state();
    const auto p = epi::baseline_params();
    const epi::IntegratorConfig ic{1.0, 60};
    const auto ode = epi::simulate_ode(x0, hump_policy(), p, ic);
    const auto ens = epi::simulate_ensemble(x0, hump_policy(), p, epi::scaled(epi::baseline_noise(), 0.1), ic, 1000,
                                            2024, worker_count());
    double worst = 0.0;
    std::string where = "-";
    for (std::size_t n = 0; n < ode.states.size(); ++n) {
        for (std::size_t k = 0; k < epi::kCompartments; ++k) {
            const double ref = ode.states[n][k];
            if (ref > 1e-4) {
                const double rel = std::abs(ens.mean.states[n][k] - ref) / ref;
                if (rel > worst) {
                    worst = rel;
                    where = fmt("%s day %zu", epi::kCompartmentNames[k], n);
                }
            }
        }
    }
    return {worst <= 0.02, fmt("max relative deviation %.3f%% at %s (limit 2%%)", 100 * worst, where.c_str())};
}

// 4 -----------------------------------------------------------------------------

Outcome autodiff()
{
    using nn::Activation;
    std::mt19937_64 rng(404);
    std::uniform_int_distribution<int> width(1, 8), depth(1, 3), pick(0, 2);
    std::normal_distribution<double> nd(0.0, 1.0);
    const Activation hidden_acts[] = {Activation::tanh, Activation::sigmoid, Activation::identity};
    const Activation output_acts[] = {Activation::identity, Activation::sigmoid, Activation::affine_bounded};
    const double h = 1e-5;
    const double floor = 1e-6;
    double worst = 0.0;
    std::size_t checked = 0;

    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::size_t> sizes{static_cast<std::size_t>(width(rng))};
        for (int d = depth(rng); d > 0; --d) {
            sizes.push_back(static_cast<std::size_t>(width(rng)));
        }
        sizes.push_back(static_cast<std::size_t>(width(rng)));
        auto net = nn::DenseNetwork::xavier(sizes, hidden_acts[pick(rng)], output_acts[pick(rng)], rng, {-0.5, 2.0});
        std::vector<double> in, w;
        for (std::size_t i = 0; i < sizes.front(); ++i) {
            in.push_back(nd(rng));
        }
        for (std::size_t j = 0; j < sizes.back(); ++j) {
            w.push_back(nd(rng));
        }
        const auto objective = [&](const nn::DenseNetwork& n, const std::vector<double>& x) {
            const auto y = n.forward(x);
            double s = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) {
                s += w[j] * y[j];
            }
            return s;
        };

        nn::Tape tape;
        const auto params = net.bind(tape);
        std::vector<nn::Var> x;
        for (double v : in) {
            x.push_back(tape.input(v));
        }
        const auto y = net.forward(params, x);
        nn::Var obj = tape.constant(0.0);
        for (std::size_t j = 0; j < y.size(); ++j) {
            obj = obj + w[j] * y[j];
        }
        tape.backward(obj);

        const auto rel = [&](double a, double fd) {
            return std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), floor});
        };
        const auto flat = net.parameters();
        for (std::size_t i = 0; i < flat.size(); ++i) {
            auto plus = net, minus = net;
            auto fp = flat, fm = flat;
            fp[i] += h;
            fm[i] -= h;
            plus.set_parameters(fp);
            minus.set_parameters(fm);
            const double fd = (objective(plus, in) - objective(minus, in)) / (2 * h);
            worst = std::max(worst, rel(tape.adjoint(params.flat[i]), fd));
            ++checked;
        }
        for (std::size_t i = 0; i < in.size(); ++i) {
            auto ip = in, im = in;
            ip[i] += h;
            im[i] -= h;
            const double fd = (objective(net, ip) - objective(net, im)) / (2 * h);
            worst = std::max(worst, rel(tape.adjoint(x[i]), fd));
            ++checked;
        }
    }
    return {worst < 1e-4, fmt("max relative error %.3g over %zu gradients, magnitude floor %.0e (limit 1e-4)", worst,
                              checked, floor)};
}

// 5 -----------------------------------------------------------------------------

std::optional<fs::path> victoria_dir()
{
    if (const char* env = std::getenv("VAXOPT_VICTORIA_DIR")) {
        return fs::path(env);
    }
    const auto local = fs::path(VAXOPT_SOURCE_DIR) / "data" / "victoria";
    if (fs::exists(local / "dataset.csv") && fs::exists(local / "doses.csv")) {
        return local;
    }
    return std::nullopt;
}

Outcome regression()
{
    const epi::HospitalizationLink link{};
    ingest::CompartmentSeries series;
    ingest::FlowDecomposition flows;
    for (std::size_t i = 0; i < 60; ++i) {
        const double alpha = 0.002 + 0.0005 * static_cast<double>(i % 37);
        series.t.push_back(static_cast<double>(i));
        series.states.push_back(epi::baseline_train_state());
        series.alpha_obs.push_back(alpha);
        const double i1 = 0.003 + 1e-5 * static_cast<double>(i);
        const double p1 = link.intercept + link.slope * alpha;
        flows.index.push_back(i);
        flows.inflow_I1.push_back(1e-4);
        flows.inflow_I2.push_back(p1 * i1);
        flows.inflow_I3.push_back(0.0);
        flows.p1.push_back(p1);
    }
    const auto fit = ingest::fit_hospitalization_regression(flows, series);
    const double e_int = std::abs(fit.intercept - link.intercept);
    const double e_slope = std::abs(fit.slope - link.slope);
    Outcome out{e_int <= 1e-10 && e_slope <= 1e-10,
                fmt("synthetic |d intercept| %.2g, |d slope| %.2g (limit 1e-10)", e_int, e_slope)};

    const auto dir = victoria_dir();
    if (!dir) {
        out.details += "; Victoria files: SKIP (not supplied)";
        return out;
    }
    const auto parsed = ingest::parse_dataset((*dir / "dataset.csv").string(), {"VIC"});
    const auto doses = ingest::parse_doses((*dir / "doses.csv").string());
    const auto s = ingest::build_compartments(parsed.records, doses.records, 6555000.0);
    const auto real = ingest::fit_hospitalization_regression(ingest::decompose_flows(s), s);
    const bool ok = std::abs(real.intercept - 0.0060) < 5e-5 && std::abs(real.slope + 0.1341) < 5e-5;
    out.pass = out.pass && ok;
    out.details += fmt("; Victoria intercept %.4f slope %.4f (want 0.0060, -0.1341)", real.intercept, real.slope);
    return out;
}

// 6 -----------------------------------------------------------------------------

Outcome calibration()
{
    const auto p = epi::baseline_params();
    const double alpha = 0.005;

    // Noiseless data from a fine Euler solve, sampled daily.
    const auto fine = epi::simulate_ode(epi::baseline_train_state(), epi::constant_policy(alpha), p, {0.01, 5900});
    ingest::CompartmentSeries clean;
    clean.population = 6555000.0;
    for (std::size_t i = 0; i < 60; ++i) {
        clean.t.push_back(static_cast<double>(i));
        clean.states.push_back(fine.states[i * 100]);
        clean.alpha_obs.push_back(i == 0 ? 0.0 : alpha);
    }
    calib::CalibrationConfig cfg;
    cfg.epochs = 20000;
    cfg.grid_fraction = 0.5;
    cfg.log_every = 1000;
    cfg.theta_center = calib::theta_from_params(p, alpha);
    const auto det = calib::fit_deterministic(clean, cfg);

    const auto got = calib::theta_vector(det.theta);
    const auto want = calib::theta_vector(cfg.theta_center);
    std::string rec;
    bool recovered = true;
    for (std::size_t j = 0; j < calib::kThetaSize; ++j) {
        const std::string name = calib::kThetaNames[j];
        if (name == "beta1" || name == "gamma" || name == "delta1") {
            const double rel = got[j] / want[j] - 1.0;
            recovered = recovered && std::abs(rel) <= 0.15;
            rec += fmt("%s %+.1f%% ", name.c_str(), 100 * rel);
        }
    }

    // Noisy data: 60 training days, the next 21 held out.
    epi::NoiseIntensities z;
    z.sigma.fill(0.06);
    const auto noisy = epi::simulate_path(epi::baseline_train_state(), epi::constant_policy(alpha), p, z, {1.0, 80},
                                          epi::NoisePath::sample(80, 7));
    ingest::CompartmentSeries train, test;
    for (std::size_t i = 0; i < 81; ++i) {
        auto& s = i < 60 ? train : test;
        s.t.push_back(static_cast<double>(i < 60 ? i : i - 60));
        s.states.push_back(noisy.states[i]);
        s.alpha_obs.push_back(alpha);
        s.population = 6555000.0;
    }
    cfg.z_center = z;
    const auto det_noisy = calib::fit_deterministic(train, cfg);
    const auto sto_noisy = calib::fit_stochastic(train, cfg);
    const auto md = calib::evaluate_fit(det_noisy, test, test.states[0], 200, 11);
    const auto ms = calib::evaluate_fit(sto_noisy, test, test.states[0], 200, 11);

    return {recovered && ms.mse <= md.mse,
            fmt("recovery %s(limit 15%%); test MSE stochastic %.4e vs deterministic %.4e", rec.c_str(), ms.mse,
                md.mse)};
}

// 7, 8 --------------------------------------------------------------------------

struct BaseCase {
    epi::CompartmentState x0 = epi::baseline_train_state();
    epi::EpidemicParams params = epi::baseline_params();
    epi::NoiseIntensities z = epi::baseline_noise();
    cost::CostParams cost;
    control::ControlConfig cfg;
    control::Actual actual;

    BaseCase()
    {
        cfg.iterations = 2000;
        cfg.batch_size = 32;
        cfg.alpha_min = 0.004;
        cfg.alpha_max = 0.03;
        cfg.threads = worker_count();
        for (std::size_t n = 0; n < cfg.steps; ++n) {
            actual.series.push_back(hump(n));
        }
    }
};

const control::PolicyNetwork& base_policy(const BaseCase& bc)
{
    static std::optional<control::PolicyNetwork> trained;
    if (!trained) {
        trained = control::train_policy(bc.x0, bc.params, bc.z, bc.cost, bc.cfg).policy;
    }
    return *trained;
}

Outcome ordering()
{
    const BaseCase bc;
    const auto& policy = base_policy(bc);
    const std::vector<control::Strategy> strategies{control::Optimal{{policy}}, bc.actual,
                                                    control::constant_from_actual(bc.actual, bc.cfg.steps),
                                                    control::Zero{}};
    std::vector<control::RolloutResult> r;
    for (const auto& s : strategies) {
        r.push_back(control::evaluate_strategy(s, bc.x0, bc.params, bc.z, bc.cost, bc.cfg, 500, 99));
    }
    bool ok = true;
    std::string d;
    for (std::size_t i = 0; i < r.size(); ++i) {
        d += fmt("%s %.2f%s", control::strategy_name(strategies[i]).c_str(), r[i].total(), i + 1 < r.size() ? " < " : "");
    }
    d += "; gaps";
    for (std::size_t i = 0; i + 1 < r.size(); ++i) {
        const double gap = r[i + 1].total() - r[i].total();
        const double se = cost::pooled_standard_error(r[i].total_standard_error(), r[i + 1].total_standard_error());
        const double paired = cost::paired_standard_error(r[i].totals, r[i + 1].totals);
        ok = ok && gap > se;
        d += fmt(" %.2f/%.2f/%.2f", gap, se, paired);
    }
    d += " (gap/pooled SE/paired SE)";
    const double zero_rel = r[3].total() / 47.89 - 1.0;
    ok = ok && std::abs(zero_rel) <= 0.15;
    d += fmt("; Zero vs 47.89 %+.1f%% (limit 15%%)", 100 * zero_rel);
    return {ok, d};
}

Outcome shape()
{
    const BaseCase bc;
    const auto path = control::alpha_path(base_policy(bc), bc.x0, bc.params, bc.z, bc.cfg, 500, 99);
    double head = 0.0, tail = 0.0;
    for (std::size_t n = 0; n < 10; ++n) {
        head += path[n] / 10.0;
        tail += path[path.size() - 1 - n] / 10.0;
    }
    const double start_gap = std::abs(path.front() - bc.cfg.alpha_max) / bc.cfg.alpha_max;
    return {start_gap <= 0.05 && tail < head,
            fmt("alpha_0 %.5f (%.1f%% below alpha_max, limit 5%%); mean first 10 %.5f, last 10 %.5f", path.front(),
                100 * start_gap, head, tail)};
}

// 9 -----------------------------------------------------------------------------

Outcome one_step()
{
    control::ControlConfig cfg;
    cfg.steps = 1;
    cfg.terminal_cost = true;
    cfg.alpha_min = 0.0;
    cfg.alpha_max = 0.001;
    cfg.batch_size = 16;
    cfg.iterations = 1000;
    const auto x0 = epi::baseline_train_state();
    const auto p = epi::baseline_params();
    const auto z = epi::baseline_noise();
    const cost::CostParams cp;
    const auto trained = control::train_policy(x0, p, z, cp, cfg);
    const double a = control::policy_rate(trained.policy, 0, x0);

    const double step = (cfg.alpha_max - cfg.alpha_min) / 100.0;
    double best = 1e300, argmin = 0.0;
    for (int g = 0; g <= 100; ++g) {
        const double rate = cfg.alpha_min + step * g;
        const auto r = control::evaluate_strategy(control::Constant{rate}, x0, p, z, cp, cfg, 1000, 5);
        if (r.total() < best) {
            best = r.total();
            argmin = rate;
        }
    }
    const double off = std::abs(a - argmin) / step;
    return {off <= 1.0, fmt("trained %.4e, grid argmin %.4e, %.2f grid steps apart (limit 1)", a, argmin, off)};
}

// 10 ----------------------------------------------------------------------------

Outcome sensitivity()
{
    const BaseCase bc;
    analysis::Scenario base{bc.x0, bc.params, bc.z, bc.cost, bc.cfg,
                            control::constant_from_actual(bc.actual, bc.cfg.steps).rate};
    bool ok = true;
    std::string d;
    for (const auto& spec : {analysis::SweepSpec{analysis::SweepTarget::noise, {0.1, 0.5, 1.0, 2.0}},
                             analysis::SweepSpec{analysis::SweepTarget::infection, {0.1, 0.5, 1.0, 1.5}}}) {
        const auto r = analysis::run_sweep(spec, base, 500, 99);
        d += analysis::to_string(spec.target) + " totals";
        for (std::size_t i = 0; i < r.levels.size(); ++i) {
            const auto& l = r.levels[i];
            if (!l.ok) {
                ok = false;
                d += fmt(" [level %g failed: %s]", l.level, l.error.c_str());
                continue;
            }
            d += fmt(" %.2f", l.optimal.total());
            if (i > 0 && r.levels[i - 1].ok) {
                const auto& prev = r.levels[i - 1].optimal;
                const double gap = l.optimal.total() - prev.total();
                const double se = cost::pooled_standard_error(prev.total_standard_error(), l.optimal.total_standard_error());
                if (!(gap > -se)) {
                    ok = false;
                    d += fmt("(gap %.2f < -%.2f)", gap, se);
                }
            }
        }
        if (spec.target == analysis::SweepTarget::infection) {
            d += "; infection savings (healthcare+economic)";
            double prev = -1e300;
            for (const auto& l : r.levels) {
                if (!l.ok) {
                    continue;
                }
                const double s = l.savings.healthcare + l.savings.economic;
                ok = ok && s > prev;
                prev = s;
                d += fmt(" %.2f", s);
            }
        }
        else {
            d += "; ";
        }
    }
    return {ok, d};
}

// 11 ----------------------------------------------------------------------------

std::map<std::string, std::string> tree(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            std::ifstream in(e.path(), std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            files[fs::relative(e.path(), root).string()] = ss.str();
        }
    }
    return files;
}

Outcome determinism()
{
    const auto scratch = fs::temp_directory_path() / "vaxopt_acceptance_determinism";
    fs::remove_all(scratch);
    cli::Options opts;
    opts.config_path = (fs::path(VAXOPT_SOURCE_DIR) / "data" / "fixture" / "config.json").string();
    opts.mode = cli::Mode::desk;
    opts.seed = 20211004;
    opts.threads = worker_count();
    for (const char* run : {"a", "b"}) {
        opts.out_dir = (scratch / run).string();
        for (const char* cmd : {"ingest", "calibrate", "optimize", "sweep", "report"}) {
            std::ostringstream log, err;
            const int code = cli::run_command(cmd, opts, log, err);
            if (code != 0) {
                return {false, fmt("run %s: '%s' exited %d: %s", run, cmd, code, err.str().c_str())};
            }
        }
    }
    const auto a = tree(scratch / "a");
    const auto b = tree(scratch / "b");
    std::size_t differing = 0;
    for (const auto& [name, body] : a) {
        const auto it = b.find(name);
        if (it == b.end() || it->second != body) {
            ++differing;
        }
    }
    differing += b.size() > a.size() ? b.size() - a.size() : 0;
    return {differing == 0 && !a.empty(),
            fmt("%zu files per tree, %zu differ (fixture config, seed 20211004)", a.size(), differing)};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);

    const std::vector<Criterion> criteria{
        {1, "conservation identity", 1, conservation},
        {2, "zero-noise equivalence", 1, zero_noise},
        {3, "ensemble consistency", 10, ensemble},
        {4, "autodiff correctness", 10, autodiff},
        {5, "regression fidelity", 0, regression},
        {6, "calibration recovery", 15 * 60, calibration},
        {7, "control optimality ordering", 20 * 60, ordering},
        {8, "policy shape", 0, shape},
        {9, "one-step brute-force equivalence", 60, one_step},
        {10, "sensitivity monotonicity", 45 * 60, sensitivity},
        {11, "end-to-end determinism", 0, determinism},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        if (only != 0 && c.id != only) {
            continue;
        }
        const auto t0 = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.check();
        }
        catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string timing = fmt("%.2f s", sec);
        if (c.limit_seconds > 0) {
            timing += fmt(", limit %.0f s", c.limit_seconds);
            out.pass = out.pass && sec < c.limit_seconds;
        }
        std::printf("[%s] %d %s: %s (%s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name, out.details.c_str(),
                    timing.c_str());
        std::fflush(stdout);
        failures += out.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
