#pragma once

#include "vaxopt/ingest/series.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <span>
#include <vector>

namespace vaxopt::ingest {

/// Non-negative inflows into the infectious states, one entry per usable date.
struct FlowDecomposition {
    std::vector<std::size_t> index; // position in the source series
    std::vector<double> inflow_I1, inflow_I2, inflow_I3;
    std::vector<double> p1;         // inflow_I2 / I1 on the previous date
    std::vector<std::size_t> skipped;

    std::size_t size() const { return index.size(); }
};

/// Inflow_k = max(0, dI_k + I_k / (I1 + I2 + I3) * dR) on each date after the first.
/// Dates with no infectious population, or with I1 = 0 the day before, are skipped.
FlowDecomposition decompose_flows(const CompartmentSeries& series);

struct RegressionFit {
    double intercept = 0.0;
    double slope = 0.0;
    double slope_se = 0.0;
    double p_value = 1.0; // two-sided, slope = 0
    double r2 = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares of y on x. Throws InputError for fewer than 3 points or
/// constant x.
RegressionFit ols(std::span<const double> x, std::span<const double> y);

/// Regresses the p1 observations on the observed vaccination rate of the same date.
RegressionFit fit_hospitalization_regression(const FlowDecomposition& flows, const CompartmentSeries& series);

nlohmann::json to_json(const RegressionFit& fit);

/// `t,inflow_I1,inflow_I2,inflow_I3,p1,alpha`
void write_flows_csv(std::ostream& out, const FlowDecomposition& flows, const CompartmentSeries& series);

struct VitalStatistics {
    double births_per_year = 75363.0;
    double net_migrants_per_quarter = 13100.0;
    double days_per_quarter = 92.0;
    double population = 6555000.0;
    double life_expectancy_male = 81.7;
    double life_expectancy_female = 85.7;
    double males_per_female = 0.98;
};

struct VitalRates {
    double lambda = 0.0;
    double zeta = 0.0;
    double birth_rate = 0.0;
    double migration_rate = 0.0;
};

VitalRates compute_vital_rates(const VitalStatistics& v);

} // namespace vaxopt::ingest
