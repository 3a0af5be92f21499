#pragma once

#include "vaxopt/analysis/sweep.hpp"
#include "vaxopt/calib/calibrate.hpp"
#include "vaxopt/control/policy.hpp"
#include "vaxopt/cost/cost.hpp"
#include "vaxopt/ingest/date.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace vaxopt::cli {

enum class Mode { desk, paper };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& name);

/// Command-line flags; each one overrides the matching config field.
struct Options {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<Mode> mode;
    std::optional<std::size_t> threads;
};

enum class CalibrationKind { deterministic, stochastic, both };

struct RunConfig {
    std::string dataset; // as written in the config
    std::string doses;
    std::string dataset_resolved; // relative to the config file
    std::string doses_resolved;
    std::string region;
    std::string out = "out";
    double population = 6555000.0;
    ingest::Date train_start{};
    ingest::Date train_end{};
    ingest::Date test_end{};
    CalibrationKind calibration_kind = CalibrationKind::both;
    calib::CalibrationConfig calibration;
    std::size_t fit_paths = 200;
    control::ControlConfig control;
    /// Rate bounds taken from the min and max observed rate over the horizon unless
    /// the config sets alpha_min or alpha_max.
    bool bounds_from_data = true;
    cost::CostParams cost;
    std::size_t eval_paths = 500;
    std::vector<analysis::SweepSpec> sweeps;
    std::optional<std::uint64_t> seed;
    Mode mode = Mode::desk;
    std::size_t threads = 1;
};

/// Desk-mode ceilings and paper-mode settings.
inline constexpr std::size_t kDeskMaxEpochs = 20000;
inline constexpr std::size_t kDeskMaxIterations = 2000;

/// Reads the JSON config at opts.config_path and applies flags, defaults and the mode.
/// Throws InputError if the file is missing, ConfigError on invalid values.
RunConfig load_run_config(const Options& opts);
RunConfig run_config_from_json(const nlohmann::json& doc, const Options& opts, const std::string& base_dir = ".");

/// Resolved configuration with defaults filled; omits the output directory and the
/// resolved paths so artifact trees do not depend on where they are written.
nlohmann::json to_json(const RunConfig& cfg);

/// Seeds derived from the master seed, one per stage.
struct StageSeeds {
    std::uint64_t calibration = 0;
    std::uint64_t fit_evaluation = 0;
    std::uint64_t control = 0;
    std::uint64_t evaluation = 0;
    std::uint64_t sweep = 0;
};
StageSeeds stage_seeds(std::uint64_t master);

/// Throws ConfigError unless a master seed was set by flag or config.
std::uint64_t require_seed(const RunConfig& cfg, const std::string& command);

void cmd_ingest(const RunConfig& cfg, std::ostream& log);
void cmd_calibrate(const RunConfig& cfg, std::ostream& log);
void cmd_optimize(const RunConfig& cfg, std::ostream& log);
/// Returns false if some sweep had no successful level.
bool cmd_sweep(const RunConfig& cfg, std::ostream& log);
void cmd_report(const RunConfig& cfg, std::ostream& log);

/// Runs one command and maps failures to exit codes: 2 input, 3 numerical, 4 config.
int run_command(const std::string& command, const Options& opts, std::ostream& log, std::ostream& err);

} // namespace vaxopt::cli
