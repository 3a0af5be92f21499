#include "pipeline.hpp"

#include "vaxopt/calib/calibrate.hpp"
#include "vaxopt/epi/simulate.hpp"
#include "vaxopt/errors.hpp"
#include "vaxopt/ingest/records.hpp"
#include "vaxopt/ingest/series.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace vaxopt;
using namespace vaxopt::cli;
namespace fs = std::filesystem;

namespace {

fs::path fixture_dir() { return fs::path(VAXOPT_SOURCE_DIR) / "data" / "fixture"; }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name)
{
    auto p = fs::temp_directory_path() / ("vaxopt_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

nlohmann::json small_config()
{
    auto doc = nlohmann::json::parse(slurp(fixture_dir() / "config.json"));
    doc["data"]["dataset"] = (fixture_dir() / "dataset.csv").string();
    doc["data"]["doses"] = (fixture_dir() / "doses.csv").string();
    doc["calibration"]["epochs"] = 40;
    doc["calibration"]["hidden"] = {8};
    doc["calibration"]["fit_paths"] = 4;
    doc["control"]["iterations"] = 3;
    doc["control"]["batch_size"] = 2;
    doc["control"]["hidden"] = {4};
    doc["control"]["steps"] = 10;
    doc["evaluation_paths"] = 6;
    doc["sweeps"] = {{{"target", "noise"}, {"levels", {0.5, 1.0}}}};
    return doc;
}

std::string write_config(const fs::path& dir, const nlohmann::json& doc)
{
    const auto p = dir / "config.json";
    std::ofstream(p) << doc.dump(2);
    return p.string();
}

int run(const std::string& cmd, Options opts, std::string* err_text = nullptr)
{
    std::ostringstream log, err;
    const int code = run_command(cmd, opts, log, err);
    if (err_text) {
        *err_text = err.str();
    }
    return code;
}

std::map<std::string, std::string> tree(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (e.is_regular_file()) {
            files[fs::relative(e.path(), root).string()] = slurp(e.path());
        }
    }
    return files;
}

} // namespace

TEST(RunConfig, DefaultsFlagsAndDeskCaps)
{
    auto doc = small_config();
    doc["calibration"]["epochs"] = 50000;
    doc["control"]["iterations"] = 9000;
    doc["seed"] = 3;
    Options opts;
    opts.threads = 4;
    opts.seed = 11;
    const auto cfg = run_config_from_json(doc, opts);
    EXPECT_EQ(cfg.mode, Mode::desk);
    EXPECT_EQ(cfg.calibration.epochs, kDeskMaxEpochs);
    EXPECT_EQ(cfg.control.iterations, kDeskMaxIterations);
    EXPECT_EQ(*cfg.seed, 11u); // flag wins
    EXPECT_EQ(cfg.threads, 4u);
    EXPECT_EQ(cfg.calibration.seed, stage_seeds(11).calibration);
    EXPECT_TRUE(cfg.bounds_from_data);
    EXPECT_EQ(to_json(cfg)["control"]["alpha_max"], "observed");
}

TEST(RunConfig, PaperModeSettingsAreEchoed)
{
    Options opts;
    opts.mode = Mode::paper;
    const auto cfg = run_config_from_json(small_config(), opts);
    const auto echo = to_json(cfg);
    EXPECT_EQ(echo["mode"], "paper");
    EXPECT_EQ(echo["calibration"]["epochs"], 100000);
    EXPECT_EQ(echo["calibration"]["learning_rate"], 1e-6);
    EXPECT_EQ(echo["calibration"]["n_mc"], 5);
    EXPECT_EQ(echo["control"]["iterations"], 10000);
    EXPECT_EQ(echo["control"]["batch_size"], 64);
    EXPECT_EQ(echo["control"]["runs"], 5);
}

TEST(RunConfig, RejectsBadValues)
{
    auto doc = small_config();
    doc["calibration"]["epochs"] = -3;
    EXPECT_THROW(run_config_from_json(doc, {}), ConfigError);
    doc = small_config();
    doc["mode"] = "fast";
    EXPECT_THROW(run_config_from_json(doc, {}), ConfigError);
    doc = small_config();
    doc["window"]["train_end"] = "2021-09-01";
    EXPECT_THROW(run_config_from_json(doc, {}), ConfigError);
    doc = small_config();
    doc["sweeps"] = {{{"target", "weather"}, {"levels", {1.0}}}};
    EXPECT_THROW(run_config_from_json(doc, {}), ConfigError);
}

TEST(Ingest, FiveDayFixtureMatchesDirectBuild)
{
    const auto dir = scratch("five");
    epi::Trajectory traj = epi::simulate_ode(epi::baseline_train_state(),
                                             [](std::size_t n, const epi::CompartmentState&) { return 0.01 + 0.004 * n; },
                                             epi::baseline_params(), {1.0, 4});
    const auto start = ingest::parse_date("2021-10-04");
    const auto [recs, doses] = ingest::synthesize_records(traj, 6555000.0, start, "VIC");
    {
        std::ofstream f(dir / "dataset.csv");
        ingest::write_dataset(f, recs);
        std::ofstream g(dir / "doses.csv");
        ingest::write_doses(g, doses);
    }
    auto doc = small_config();
    doc["data"]["dataset"] = "dataset.csv";
    doc["data"]["doses"] = "doses.csv";
    Options opts;
    opts.config_path = write_config(dir, doc);
    opts.out_dir = (dir / "out").string();
    ASSERT_EQ(run("ingest", opts), 0);

    const auto expected = ingest::build_compartments(recs, doses, 6555000.0);
    std::ostringstream csv;
    ingest::write_series_csv(csv, expected);
    EXPECT_EQ(slurp(dir / "out" / "ingest" / "series.csv"), csv.str());

    const auto reg = nlohmann::json::parse(slurp(dir / "out" / "ingest" / "regression.json"));
    for (const char* key : {"intercept", "slope", "p_value", "r2", "n"}) {
        EXPECT_TRUE(reg.contains(key)) << key;
    }
    const auto meta = nlohmann::json::parse(slurp(dir / "out" / "ingest" / "series.json"));
    EXPECT_EQ(meta["points"], 5);
    EXPECT_EQ(meta["start"], "2021-10-04");
    EXPECT_TRUE(fs::exists(dir / "out" / "ingest" / "flows.csv"));
}

TEST(Ingest, MissingFileExitsTwoNamingThePath)
{
    const auto dir = scratch("missing");
    auto doc = small_config();
    doc["data"]["dataset"] = "nowhere.csv";
    Options opts;
    opts.config_path = write_config(dir, doc);
    opts.out_dir = (dir / "out").string();
    std::string err;
    EXPECT_EQ(run("ingest", opts, &err), 2);
    EXPECT_NE(err.find("nowhere.csv"), std::string::npos);

    opts.config_path = (dir / "absent.json").string();
    EXPECT_EQ(run("ingest", opts, &err), 2);
    EXPECT_NE(err.find("absent.json"), std::string::npos);
}

TEST(Ingest, RepeatedRunIsIdentical)
{
    const auto dir = scratch("repeat");
    Options opts;
    opts.config_path = write_config(dir, small_config());
    opts.out_dir = (dir / "a").string();
    ASSERT_EQ(run("ingest", opts), 0);
    opts.out_dir = (dir / "b").string();
    ASSERT_EQ(run("ingest", opts), 0);
    EXPECT_EQ(tree(dir / "a"), tree(dir / "b"));
}

TEST(Calibrate, DivergenceExitsThreeWithEpoch)
{
    const auto dir = scratch("diverge");
    auto doc = small_config();
    auto theta = calib::theta_to_json(calib::theta_from_params(epi::baseline_params()));
    theta["beta1"] = 1e300;
    doc["calibration"]["theta_center"] = theta;
    doc["calibration"]["kind"] = "deterministic";
    Options opts;
    opts.config_path = write_config(dir, doc);
    opts.out_dir = (dir / "out").string();
    ASSERT_EQ(run("ingest", opts), 0);
    std::string err;
    EXPECT_EQ(run("calibrate", opts, &err), 3);
    EXPECT_NE(err.find("index 0"), std::string::npos) << err;
}

TEST(Optimize, RequiresSeedFlag)
{
    const auto dir = scratch("noseed");
    auto doc = small_config();
    doc["seed"] = 4;
    Options opts;
    opts.config_path = write_config(dir, doc);
    opts.out_dir = (dir / "out").string();
    std::string err;
    EXPECT_EQ(run("optimize", opts, &err), 4);
    EXPECT_NE(err.find("--seed"), std::string::npos);
    EXPECT_EQ(run("sweep", opts), 4);
}

TEST(Sweep, PartialFailureStillSucceedsAllFailedDoesNot)
{
    const auto dir = scratch("sweep");
    auto doc = small_config();
    doc["calibration"]["kind"] = "deterministic";
    doc["sweeps"] = {{{"target", "initial_vaccinated"}, {"levels", {0.8, 1.5}}}};
    Options opts;
    opts.config_path = write_config(dir, doc);
    opts.out_dir = (dir / "out").string();
    opts.seed = 2;
    ASSERT_EQ(run("ingest", opts), 0);
    ASSERT_EQ(run("calibrate", opts), 0);
    EXPECT_EQ(run("sweep", opts), 0);
    const auto r = nlohmann::json::parse(slurp(dir / "out" / "sweep" / "sweep_initial_vaccinated.json"));
    EXPECT_TRUE(r["levels"][0]["ok"]);
    EXPECT_FALSE(r["levels"][1]["ok"]);

    doc["sweeps"] = {{{"target", "initial_vaccinated"}, {"levels", {1.5, 2.0}}}};
    opts.config_path = write_config(dir, doc);
    EXPECT_EQ(run("sweep", opts), 3);
}

TEST(Pipeline, EveryArtifactDirectoryEchoesConfigAndRunsAreByteIdentical)
{
    const auto dir = scratch("pipeline");
    Options opts;
    opts.config_path = write_config(dir, small_config());
    opts.seed = 9;
    for (const char* out : {"a", "b"}) {
        opts.out_dir = (dir / out).string();
        opts.threads = out[0] == 'a' ? 1 : 3;
        for (const char* cmd : {"ingest", "calibrate", "optimize", "sweep", "report"}) {
            ASSERT_EQ(run(cmd, opts), 0) << cmd;
        }
    }
    const auto a = tree(dir / "a");
    EXPECT_EQ(a, tree(dir / "b"));
    for (const char* stage : {"ingest", "calibrate", "optimize", "sweep", "report"}) {
        const auto echo = nlohmann::json::parse(a.at(std::string(stage) + "/run_config.json"));
        EXPECT_EQ(echo["seed"], 9) << stage;
        EXPECT_TRUE(echo.contains("calibration")) << stage;
    }
    for (const char* json : {"calibrate/deterministic_estimate.json", "calibrate/metrics.json",
                             "optimize/policy.json", "optimize/comparison.json", "sweep/sweep_noise.json"}) {
        const auto doc = nlohmann::json::parse(a.at(json));
        EXPECT_TRUE(doc.contains("config") || doc.contains("run_config")) << json;
    }
    const auto cmp = nlohmann::json::parse(a.at("optimize/comparison.json"));
    ASSERT_EQ(cmp["strategies"].size(), 4u);
    const double lo = cmp["config"]["control"]["alpha_min"];
    const double hi = cmp["config"]["control"]["alpha_max"];
    for (double v : cmp["strategies"][0]["alpha"]) {
        EXPECT_GE(v, lo);
        EXPECT_LE(v, hi);
    }
}
