#include "pipeline.hpp"

#include "vaxopt/analysis/report.hpp"
#include "vaxopt/control/strategy.hpp"
#include "vaxopt/errors.hpp"
#include "vaxopt/ingest/flows.hpp"
#include "vaxopt/ingest/records.hpp"
#include "vaxopt/ingest/series.hpp"
#include "vaxopt/io.hpp"
#include "vaxopt/random.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace vaxopt::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kTrainStart = "2021-10-04";
constexpr const char* kTrainEnd = "2021-12-03";
constexpr const char* kTestEnd = "2021-12-23";

std::vector<analysis::SweepSpec> reduced_sweeps()
{
    using analysis::SweepTarget;
    return {{SweepTarget::noise, {0.1, 0.5, 1.0, 2.0}}, {SweepTarget::infection, {0.1, 0.5, 1.0, 1.5}}};
}

std::vector<analysis::SweepSpec> full_sweeps()
{
    using analysis::SweepTarget;
    return {
        {SweepTarget::noise, {0.1, 0.5, 1.0, 2.0}},
        {SweepTarget::infection, {0.1, 0.5, 1.0, 1.5}},
        {SweepTarget::vaccination_cost, {0.1, 0.5, 1.0, 2.0}},
        {SweepTarget::economic_cost, {0.1, 0.5, 1.0, 2.0}},
        {SweepTarget::hesitancy, {0.7, 0.85, 1.0, 1.15}},
        {SweepTarget::initial_vaccinated, {0.25, 0.75, 0.8, 0.85, 0.9, 0.95}},
    };
}

std::string kind_name(CalibrationKind k)
{
    switch (k) {
    case CalibrationKind::deterministic:
        return "deterministic";
    case CalibrationKind::stochastic:
        return "stochastic";
    case CalibrationKind::both:
        return "both";
    }
    return "both";
}

CalibrationKind kind_from_string(const std::string& s)
{
    if (s == "deterministic") {
        return CalibrationKind::deterministic;
    }
    if (s == "stochastic") {
        return CalibrationKind::stochastic;
    }
    if (s == "both") {
        return CalibrationKind::both;
    }
    throw ConfigError("calibration kind must be deterministic, stochastic or both, got '" + s + "'");
}

ingest::Date date_field(const nlohmann::json& doc, const char* key, const char* fallback)
{
    const auto text = doc.contains(key) ? doc.at(key).get<std::string>() : std::string(fallback);
    try {
        return ingest::parse_date(text);
    }
    catch (const InputError& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
}

nlohmann::json read_json(const fs::path& p)
{
    auto in = io::open_input(p.string());
    try {
        return nlohmann::json::parse(in);
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError("'" + p.string() + "' is not valid JSON: " + e.what());
    }
}

void write_json(const fs::path& p, const nlohmann::json& doc)
{
    auto out = io::open_output(p.string());
    out << doc.dump(2) << '\n';
}

fs::path stage_dir(const RunConfig& cfg, const char* stage)
{
    const auto dir = fs::path(cfg.out) / stage;
    io::ensure_directory(dir.string());
    return dir;
}

nlohmann::json echo(const RunConfig& cfg, const std::string& command)
{
    auto doc = to_json(cfg);
    doc["command"] = command;
    if (cfg.seed) {
        const auto s = stage_seeds(*cfg.seed);
        doc["derived_seeds"] = {{"calibration", s.calibration}, {"fit_evaluation", s.fit_evaluation},
                                {"control", s.control},         {"evaluation", s.evaluation},
                                {"sweep", s.sweep}};
    }
    return doc;
}

struct LoadedSeries {
    ingest::CompartmentSeries series;
    ingest::CompartmentSeries train;
    ingest::CompartmentSeries test;
};

LoadedSeries load_series(const RunConfig& cfg)
{
    const auto dir = fs::path(cfg.out) / "ingest";
    const auto meta = read_json(dir / "series.json");
    LoadedSeries s;
    try {
        s.series = ingest::read_series_csv((dir / "series.csv").string(),
                                           ingest::parse_date(meta.at("start").get<std::string>()),
                                           meta.at("population").get<double>());
    }
    catch (const nlohmann::json::exception& e) {
        throw InputError("malformed series metadata: " + std::string(e.what()));
    }
    std::tie(s.train, s.test) = ingest::split_train_test(s.series, cfg.train_start, cfg.train_end, cfg.test_end);
    return s;
}

struct LoadedEstimate {
    calib::ParamEstimate estimate;
    std::string source;
};

LoadedEstimate load_estimate(const RunConfig& cfg)
{
    const auto dir = fs::path(cfg.out) / "calibrate";
    for (const char* name : {"stochastic_estimate.json", "deterministic_estimate.json"}) {
        if (fs::exists(dir / name)) {
            return {calib::estimate_from_json(read_json(dir / name)), name};
        }
    }
    throw InputError("no estimate under '" + dir.string() + "'; run calibrate first");
}

struct Problem {
    analysis::Scenario scenario;
    std::vector<double> actual;
    std::string estimate_source;
};

Problem build_problem(const RunConfig& cfg)
{
    const auto loaded = load_series(cfg);
    const auto est = load_estimate(cfg);
    Problem pb;
    pb.estimate_source = est.source;
    auto& sc = pb.scenario;
    sc.x0 = loaded.train.states.front();
    sc.params = calib::params_from_theta(est.estimate.theta);
    const auto reg_path = fs::path(cfg.out) / "ingest" / "regression.json";
    if (fs::exists(reg_path)) {
        const auto reg = read_json(reg_path);
        sc.params.hosp_link = {reg.at("intercept").get<double>(), reg.at("slope").get<double>()};
    }
    sc.z = est.estimate.z ? *est.estimate.z : epi::baseline_noise();
    sc.cost = cfg.cost;
    sc.control = cfg.control;
    sc.control.threads = cfg.threads;

    const long first = ingest::days_between(loaded.series.start, cfg.train_start);
    const auto steps = static_cast<long>(cfg.control.steps);
    if (first < 0 || first + steps >= static_cast<long>(loaded.series.size())) {
        throw ConfigError("the series does not cover " + std::to_string(steps) + " control steps from the train start");
    }
    for (long i = 0; i < steps; ++i) {
        pb.actual.push_back(loaded.series.rate_after(static_cast<std::size_t>(first + i)));
    }
    if (cfg.bounds_from_data) {
        const auto [lo, hi] = std::minmax_element(pb.actual.begin(), pb.actual.end());
        if (!(*hi > *lo)) {
            throw ConfigError("observed rates are constant over the horizon; set control.alpha_min/alpha_max");
        }
        sc.control.alpha_min = *lo;
        sc.control.alpha_max = *hi;
    }
    sc.constant_rate = control::constant_from_actual(control::Actual{pb.actual}, cfg.control.steps).rate;
    return pb;
}

} // namespace

std::string to_string(Mode m)
{
    return m == Mode::paper ? "paper" : "desk";
}

Mode mode_from_string(const std::string& name)
{
    if (name == "desk") {
        return Mode::desk;
    }
    if (name == "paper") {
        return Mode::paper;
    }
    throw ConfigError("mode must be desk or paper, got '" + name + "'");
}

StageSeeds stage_seeds(std::uint64_t master)
{
    return {derive_seed(master, {1}), derive_seed(master, {2}), derive_seed(master, {3}), derive_seed(master, {4}),
            derive_seed(master, {5})};
}

std::uint64_t require_seed(const RunConfig& cfg, const std::string& command)
{
    if (!cfg.seed) {
        throw ConfigError(command + " needs an explicit --seed");
    }
    return *cfg.seed;
}

RunConfig run_config_from_json(const nlohmann::json& doc, const Options& opts, const std::string& base_dir)
{
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    RunConfig cfg;
    io::require_counts(doc, {"evaluation_paths", "seed", "threads"});
    if (doc.contains("calibration") && doc["calibration"].is_object()) {
        io::require_counts(doc["calibration"], {"fit_paths"});
    }
    try {
        cfg.mode = opts.mode ? *opts.mode : mode_from_string(doc.value("mode", std::string("desk")));
        const auto data = doc.value("data", nlohmann::json::object());
        cfg.dataset = data.value("dataset", std::string());
        cfg.doses = data.value("doses", std::string());
        cfg.region = data.value("region", std::string());
        cfg.population = data.value("population", cfg.population);
        const auto resolve = [&](const std::string& p) {
            return p.empty() || fs::path(p).is_absolute() ? p : (fs::path(base_dir) / p).lexically_normal().string();
        };
        cfg.dataset_resolved = resolve(cfg.dataset);
        cfg.doses_resolved = resolve(cfg.doses);
        cfg.out = opts.out_dir ? *opts.out_dir : doc.value("out", cfg.out);

        const auto window = doc.value("window", nlohmann::json::object());
        cfg.train_start = date_field(window, "train_start", kTrainStart);
        cfg.train_end = date_field(window, "train_end", kTrainEnd);
        cfg.test_end = date_field(window, "test_end", kTestEnd);
        if (!(cfg.train_start < cfg.train_end) || !(cfg.train_end <= cfg.test_end)) {
            throw ConfigError("window dates must satisfy train_start < train_end <= test_end");
        }

        const auto cal = doc.value("calibration", nlohmann::json::object());
        cfg.calibration_kind = kind_from_string(cal.value("kind", std::string("both")));
        cfg.fit_paths = cal.value("fit_paths", cfg.fit_paths);
        cfg.calibration = calib::calibration_config_from_json(cal);

        auto ctl_base = control::ControlConfig{};
        ctl_base.iterations = kDeskMaxIterations;
        ctl_base.batch_size = 32;
        ctl_base.runs = 1;
        const auto ctl = doc.value("control", nlohmann::json::object());
        cfg.control = control::control_config_from_json(ctl, ctl_base);
        cfg.bounds_from_data = !ctl.contains("alpha_min") && !ctl.contains("alpha_max");
        cfg.eval_paths = doc.value("evaluation_paths", cfg.eval_paths);

        cfg.cost = cost::cost_params_from_json(doc.value("cost", nlohmann::json::object()));

        if (doc.contains("sweeps")) {
            for (const auto& s : doc.at("sweeps")) {
                cfg.sweeps.push_back(analysis::sweep_spec_from_json(s));
            }
        }
        else {
            cfg.sweeps = cfg.mode == Mode::paper ? full_sweeps() : reduced_sweeps();
        }

        if (opts.seed) {
            cfg.seed = opts.seed;
        }
        else if (doc.contains("seed")) {
            cfg.seed = doc.at("seed").get<std::uint64_t>();
        }
        cfg.threads = opts.threads ? *opts.threads : doc.value("threads", std::size_t{1});
    }
    catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (cfg.threads == 0) {
        throw ConfigError("threads must be at least 1");
    }
    if (cfg.eval_paths == 0 || cfg.fit_paths == 0) {
        throw ConfigError("evaluation path counts must be positive");
    }
    if (!(cfg.population > 0.0)) {
        throw ConfigError("population must be positive");
    }

    if (cfg.mode == Mode::paper) {
        cfg.calibration.epochs = 100000;
        cfg.calibration.learning_rate = 1e-6;
        cfg.calibration.lr_final_fraction = 1.0;
        cfg.calibration.n_mc = 5;
        cfg.control.iterations = 10000;
        cfg.control.batch_size = 64;
        cfg.control.runs = 5;
    }
    else {
        cfg.calibration.epochs = std::min(cfg.calibration.epochs, kDeskMaxEpochs);
        cfg.control.iterations = std::min(cfg.control.iterations, kDeskMaxIterations);
    }
    if (cfg.seed) {
        const auto s = stage_seeds(*cfg.seed);
        cfg.calibration.seed = s.calibration;
        cfg.control.seed = s.control;
    }
    cfg.control.threads = cfg.threads;
    calib::validate(cfg.calibration);
    control::validate(cfg.control);
    return cfg;
}

RunConfig load_run_config(const Options& opts)
{
    if (opts.config_path.empty()) {
        throw ConfigError("--config is required");
    }
    const auto doc = read_json(opts.config_path);
    return run_config_from_json(doc, opts, fs::path(opts.config_path).parent_path().string());
}

nlohmann::json to_json(const RunConfig& cfg)
{
    nlohmann::json sweeps = nlohmann::json::array();
    for (const auto& s : cfg.sweeps) {
        sweeps.push_back(analysis::to_json(s));
    }
    auto cal = calib::to_json(cfg.calibration);
    cal["kind"] = kind_name(cfg.calibration_kind);
    cal["fit_paths"] = cfg.fit_paths;
    auto ctl = control::to_json(cfg.control);
    ctl.erase("threads");
    if (cfg.bounds_from_data) {
        ctl["alpha_min"] = "observed";
        ctl["alpha_max"] = "observed";
    }
    return {
        {"mode", to_string(cfg.mode)},
        {"seed", cfg.seed ? nlohmann::json(*cfg.seed) : nlohmann::json(nullptr)},
        {"data",
         {{"dataset", cfg.dataset}, {"doses", cfg.doses}, {"region", cfg.region}, {"population", cfg.population}}},
        {"window",
         {{"train_start", ingest::format_date(cfg.train_start)},
          {"train_end", ingest::format_date(cfg.train_end)},
          {"test_end", ingest::format_date(cfg.test_end)}}},
        {"calibration", cal},
        {"control", ctl},
        {"cost", cost::to_json(cfg.cost)},
        {"evaluation_paths", cfg.eval_paths},
        {"sweeps", sweeps},
    };
}

void cmd_ingest(const RunConfig& cfg, std::ostream& log)
{
    if (cfg.dataset.empty() || cfg.doses.empty()) {
        throw ConfigError("ingest needs data.dataset and data.doses");
    }
    const auto parsed = ingest::parse_dataset(cfg.dataset_resolved, ingest::ParseOptions{cfg.region});
    const auto doses = ingest::parse_doses(cfg.doses_resolved);
    const auto series = ingest::build_compartments(parsed.records, doses.records, cfg.population);
    const auto flows = ingest::decompose_flows(series);
    const auto fit = ingest::fit_hospitalization_regression(flows, series);

    const auto dir = stage_dir(cfg, "ingest");
    ingest::write_series_csv((dir / "series.csv").string(), series);
    {
        auto out = io::open_output((dir / "flows.csv").string());
        ingest::write_flows_csv(out, flows, series);
    }
    write_json(dir / "regression.json", ingest::to_json(fit));

    std::vector<std::string> warnings = parsed.warnings;
    warnings.insert(warnings.end(), doses.warnings.begin(), doses.warnings.end());
    warnings.insert(warnings.end(), series.warnings.begin(), series.warnings.end());
    ingest::VitalStatistics vs;
    vs.population = cfg.population;
    const auto vital = ingest::compute_vital_rates(vs);
    write_json(dir / "series.json", {{"start", ingest::format_date(series.start)},
                                     {"population", series.population},
                                     {"points", series.size()},
                                     {"missing_cells", parsed.missing_cells},
                                     {"vital_rates", {{"lambda", vital.lambda}, {"zeta", vital.zeta}}},
                                     {"warnings", warnings},
                                     {"config", echo(cfg, "ingest")}});
    write_json(dir / "run_config.json", echo(cfg, "ingest"));
    for (const auto& w : warnings) {
        log << "warning: " << w << '\n';
    }
    log << "ingest: " << series.size() << " dates, p1 = " << io::format_g(fit.intercept, 6) << " + "
        << io::format_g(fit.slope, 6) << " alpha -> " << dir.string() << '\n';
}

void cmd_calibrate(const RunConfig& cfg, std::ostream& log)
{
    const auto master = cfg.seed.value_or(1);
    const auto seeds = stage_seeds(master);
    auto ccfg = cfg.calibration;
    ccfg.seed = seeds.calibration;
    const auto data = load_series(cfg);
    const auto dir = stage_dir(cfg, "calibrate");
    auto echoed = echo(cfg, "calibrate");
    echoed["calibration"]["seed"] = ccfg.seed;

    nlohmann::json metrics = {{"config", echoed}};
    const auto run = [&](bool stochastic) {
        const std::string name = stochastic ? "stochastic" : "deterministic";
        const auto est = stochastic ? calib::fit_stochastic(data.train, ccfg) : calib::fit_deterministic(data.train, ccfg);
        const auto loss_name = name + "_loss.csv";
        {
            auto out = io::open_output((dir / loss_name).string());
            calib::write_loss_history(out, est.history);
        }
        auto doc = calib::estimate_to_json(est, loss_name, ccfg);
        doc["run_config"] = echoed;
        write_json(dir / (name + "_estimate.json"), doc);
        const auto m = calib::evaluate_fit(est, data.test, data.test.states.front(), stochastic ? cfg.fit_paths : 1,
                                           seeds.fit_evaluation);
        metrics[name] = calib::to_json(m);
        log << "calibrate: " << name << " test mse " << io::format_g(m.mse, 6) << '\n';
    };
    if (cfg.calibration_kind != CalibrationKind::stochastic) {
        run(false);
    }
    else {
        fs::remove(dir / "deterministic_estimate.json");
    }
    if (cfg.calibration_kind != CalibrationKind::deterministic) {
        run(true);
    }
    else {
        fs::remove(dir / "stochastic_estimate.json");
    }
    write_json(dir / "metrics.json", metrics);
    write_json(dir / "run_config.json", echoed);
}

void cmd_optimize(const RunConfig& cfg, std::ostream& log)
{
    const auto seeds = stage_seeds(require_seed(cfg, "optimize"));
    const auto pb = build_problem(cfg);
    const auto& sc = pb.scenario;
    auto ccfg = sc.control;
    ccfg.seed = seeds.control;
    const auto dir = stage_dir(cfg, "optimize");
    auto echoed = echo(cfg, "optimize");
    echoed["estimate"] = pb.estimate_source;
    echoed["control"]["alpha_min"] = pb.scenario.control.alpha_min;
    echoed["control"]["alpha_max"] = pb.scenario.control.alpha_max;

    const auto trained = control::train_runs(sc.x0, sc.params, sc.z, sc.cost, ccfg);
    control::Optimal optimal;
    std::vector<std::vector<double>> paths;
    nlohmann::json runs = nlohmann::json::array();
    {
        auto out = io::open_output((dir / "loss_history.csv").string());
        out << "run,iteration,loss\n";
        for (std::size_t r = 0; r < trained.size(); ++r) {
            optimal.runs.push_back(trained[r].policy);
            paths.push_back(control::alpha_path(trained[r].policy, sc.x0, sc.params, sc.z, ccfg, cfg.eval_paths,
                                                seeds.evaluation));
            runs.push_back(trained[r].policy.to_json());
            for (std::size_t i = 0; i < trained[r].loss_history.size(); ++i) {
                out << r << ',' << i << ',' << io::format_g(trained[r].loss_history[i]) << '\n';
            }
        }
    }
    const auto alpha = control::average_policies(paths);
    write_json(dir / "policy.json", {{"config", echoed}, {"runs", runs}});
    {
        auto out = io::open_output((dir / "alpha.csv").string());
        control::write_alpha_csv(out, alpha);
    }

    const std::vector<control::Strategy> strategies = {optimal, control::Actual{pb.actual},
                                                       control::Constant{sc.constant_rate}, control::Zero{}};
    const std::vector<std::vector<double>> alphas = {alpha, pb.actual,
                                                     std::vector<double>(ccfg.steps, sc.constant_rate),
                                                     std::vector<double>(ccfg.steps, 0.0)};
    std::vector<control::RolloutResult> results;
    analysis::Report report;
    report.config = echoed;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t k = 0; k < strategies.size(); ++k) {
        results.push_back(control::evaluate_strategy(strategies[k], sc.x0, sc.params, sc.z, sc.cost, ccfg,
                                                     cfg.eval_paths, seeds.evaluation));
        const auto name = control::strategy_name(strategies[k]);
        report.strategies.push_back({name, results[k].expected.mean, results[k].total_standard_error(), alphas[k]});
        rows.push_back({{"name", name}, {"alpha", alphas[k]}, {"rollout", analysis::to_json(results[k])}});
        log << "optimize: " << name << " expected total " << io::format_g(results[k].total(), 6) << " (se "
            << io::format_g(results[k].total_standard_error(), 3) << ")\n";
    }
    nlohmann::json gaps = nlohmann::json::array();
    for (std::size_t k = 0; k + 1 < results.size(); ++k) {
        gaps.push_back({{"from", report.strategies[k].name},
                        {"to", report.strategies[k + 1].name},
                        {"difference", results[k + 1].total() - results[k].total()},
                        {"paired_standard_error", cost::paired_standard_error(results[k].totals, results[k + 1].totals)},
                        {"pooled_standard_error", cost::pooled_standard_error(results[k].total_standard_error(),
                                                                              results[k + 1].total_standard_error())}});
    }
    write_json(dir / "comparison.json", {{"config", echoed}, {"strategies", rows}, {"gaps", gaps}});
    analysis::emit_report(report, dir.string());
}

bool cmd_sweep(const RunConfig& cfg, std::ostream& log)
{
    const auto seeds = stage_seeds(require_seed(cfg, "sweep"));
    const auto pb = build_problem(cfg);
    const auto dir = stage_dir(cfg, "sweep");
    auto echoed = echo(cfg, "sweep");
    echoed["estimate"] = pb.estimate_source;
    echoed["control"]["alpha_min"] = pb.scenario.control.alpha_min;
    echoed["control"]["alpha_max"] = pb.scenario.control.alpha_max;

    analysis::Report report;
    report.config = echoed;
    bool all_ok = true;
    for (const auto& spec : cfg.sweeps) {
        const auto r = analysis::run_sweep(spec, pb.scenario, cfg.eval_paths, seeds.sweep);
        std::size_t ok = 0;
        for (const auto& l : r.levels) {
            if (l.ok) {
                ++ok;
            }
            else {
                log << "sweep " << analysis::to_string(spec.target) << ": level " << io::format_g(l.level)
                    << " failed: " << l.error << '\n';
            }
        }
        all_ok = all_ok && ok > 0;
        auto doc = analysis::to_json(r);
        doc["config"] = echoed;
        write_json(dir / ("sweep_" + analysis::to_string(spec.target) + ".json"), doc);
        log << "sweep " << analysis::to_string(spec.target) << ": " << ok << '/' << r.levels.size()
            << " levels succeeded\n";
        report.sweeps.push_back(r);
    }
    if (!report.sweeps.empty()) {
        analysis::emit_report(report, dir.string());
    }
    return all_ok;
}

void cmd_report(const RunConfig& cfg, std::ostream& log)
{
    analysis::Report report;
    report.config = echo(cfg, "report");
    const auto comparison = fs::path(cfg.out) / "optimize" / "comparison.json";
    if (fs::exists(comparison)) {
        const auto doc = read_json(comparison);
        try {
            for (const auto& row : doc.at("strategies")) {
                const auto r = analysis::rollout_from_json(row.at("rollout"));
                report.strategies.push_back({row.at("name").get<std::string>(), r.expected.mean,
                                             r.total_standard_error(), row.at("alpha").get<std::vector<double>>()});
            }
        }
        catch (const nlohmann::json::exception& e) {
            throw InputError("malformed '" + comparison.string() + "': " + e.what());
        }
    }
    for (const auto& spec : cfg.sweeps) {
        const auto p = fs::path(cfg.out) / "sweep" / ("sweep_" + analysis::to_string(spec.target) + ".json");
        if (fs::exists(p)) {
            report.sweeps.push_back(analysis::sweep_result_from_json(read_json(p)));
        }
    }
    if (report.strategies.empty() && report.sweeps.empty()) {
        throw InputError("nothing to report under '" + cfg.out + "'; run optimize or sweep first");
    }
    const auto dir = stage_dir(cfg, "report");
    const auto files = analysis::emit_report(report, dir.string());
    log << "report: " << files.size() << " files -> " << dir.string() << '\n';
}

int run_command(const std::string& command, const Options& opts, std::ostream& log, std::ostream& err)
{
    try {
        if ((command == "optimize" || command == "sweep") && !opts.seed) {
            throw ConfigError(command + " needs an explicit --seed");
        }
        const auto cfg = load_run_config(opts);
        if (command == "ingest") {
            cmd_ingest(cfg, log);
        }
        else if (command == "calibrate") {
            cmd_calibrate(cfg, log);
        }
        else if (command == "optimize") {
            cmd_optimize(cfg, log);
        }
        else if (command == "sweep") {
            if (!cmd_sweep(cfg, log)) {
                err << "error: a sweep had no successful level\n";
                return 3;
            }
        }
        else if (command == "report") {
            cmd_report(cfg, log);
        }
        else {
            throw ConfigError("unknown command '" + command + "'");
        }
        return 0;
    }
    catch (const NumericalError& e) {
        err << "error: numerical failure at index " << e.index() << ": " << e.what() << '\n';
        return 3;
    }
    catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    }
    catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const ShapeError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace vaxopt::cli
