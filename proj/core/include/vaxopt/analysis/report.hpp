#pragma once

#include "vaxopt/analysis/sweep.hpp"
#include "vaxopt/cost/cost.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace vaxopt::analysis {

struct StrategyRow {
    std::string name;
    cost::CostBreakdown cost;
    double total_standard_error = 0.0;
    std::vector<double> alpha; // may be empty
};

struct Report {
    std::vector<StrategyRow> strategies;
    std::vector<SweepResult> sweeps;
    nlohmann::json config; // echoed into run_config.json and every SVG
};

/// Writes, under `dir`:
///   strategy_comparison.csv, strategy_alpha.svg, strategy_costs.svg   (if strategies)
///   sweep_<target>.csv, savings_<target>.csv,
///   sweep_<target>_alpha.svg, sweep_<target>_costs.svg                (per sweep)
///   run_config.json
/// Returns the file names written, in that order. Throws InputError on an empty report,
/// a sweep without levels, or an unwritable directory.
std::vector<std::string> emit_report(const Report& report, const std::string& dir);

/// `level,policy_cost,healthcare_cost,economic_cost,total`; failed levels are skipped.
void write_sweep_csv(std::ostream& out, const SweepResult& r);
/// `level,policy_savings,healthcare_savings,economic_savings`
void write_savings_csv(std::ostream& out, const SweepResult& r);
/// `strategy,policy_cost,healthcare_cost,economic_cost,total`
void write_comparison_csv(std::ostream& out, const std::vector<StrategyRow>& rows);

struct Series {
    std::string label;
    std::vector<double> y; // x is the index
};

/// Self-contained line chart; coordinates printed with fixed precision.
void write_line_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<Series>& series,
                    const nlohmann::json& metadata = nullptr);

struct StackedBar {
    std::string label;
    double policy = 0.0;
    double healthcare = 0.0;
    double economic = 0.0;
};

/// Self-contained stacked bar chart. Negative components stack downward from zero.
void write_stacked_svg(std::ostream& out, const std::string& title, const std::vector<StackedBar>& bars,
                       const nlohmann::json& metadata = nullptr);

} // namespace vaxopt::analysis
