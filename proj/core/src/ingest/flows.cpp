#include "vaxopt/ingest/flows.hpp"

#include "vaxopt/errors.hpp"
#include "vaxopt/io.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace vaxopt::ingest {

FlowDecomposition decompose_flows(const CompartmentSeries& series)
{
    if (series.size() < 2) {
        throw InputError("flow decomposition needs at least two dates");
    }
    FlowDecomposition f;
    for (std::size_t t = 1; t < series.size(); ++t) {
        const auto& x = series.states[t];
        const auto& prev = series.states[t - 1];
        const double infectious = x.I1 + x.I2 + x.I3;
        if (infectious <= 0.0 || prev.I1 <= 0.0) {
            f.skipped.push_back(t);
            continue;
        }
        const double dR = x.R - prev.R;
        f.index.push_back(t);
        f.inflow_I1.push_back(std::max(0.0, (x.I1 - prev.I1) + x.I1 / infectious * dR));
        f.inflow_I2.push_back(std::max(0.0, (x.I2 - prev.I2) + x.I2 / infectious * dR));
        f.inflow_I3.push_back(std::max(0.0, (x.I3 - prev.I3) + x.I3 / infectious * dR));
        f.p1.push_back(f.inflow_I2.back() / prev.I1);
    }
    return f;
}

RegressionFit ols(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size()) {
        throw ShapeError("regression: x and y lengths differ");
    }
    const std::size_t n = x.size();
    if (n < 3) {
        throw InputError("regression needs at least three observations");
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 1e-24 * double(n) * mx * mx) || sxx == 0.0) {
        throw InputError("regression: vaccination rate has zero variance");
    }
    RegressionFit fit;
    fit.n = n;
    if (syy <= 1e-26 * double(n) * std::max(1.0, my * my)) {
        fit.intercept = my;
        return fit; // constant response: slope 0, p-value 1
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        sse += r * r;
    }
    fit.r2 = std::clamp(1.0 - sse / syy, 0.0, 1.0);
    const double dof = double(n - 2);
    fit.slope_se = std::sqrt(sse / dof / sxx);
    if (sse <= 1e-26 * syy) {
        fit.p_value = 0.0; // exact fit
        return fit;
    }
    const double tstat = fit.slope / fit.slope_se;
    const boost::math::students_t dist(dof);
    fit.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(tstat))), 0.0, 1.0);
    return fit;
}

RegressionFit fit_hospitalization_regression(const FlowDecomposition& flows, const CompartmentSeries& series)
{
    std::vector<double> alpha;
    alpha.reserve(flows.size());
    for (auto i : flows.index) {
        alpha.push_back(series.alpha_obs.at(i));
    }
    return ols(alpha, flows.p1);
}

nlohmann::json to_json(const RegressionFit& fit)
{
    return {{"intercept", fit.intercept}, {"slope", fit.slope}, {"slope_se", fit.slope_se},
            {"p_value", fit.p_value},     {"r2", fit.r2},       {"n", fit.n}};
}

void write_flows_csv(std::ostream& out, const FlowDecomposition& flows, const CompartmentSeries& series)
{
    out << "t,inflow_I1,inflow_I2,inflow_I3,p1,alpha\n";
    for (std::size_t j = 0; j < flows.size(); ++j) {
        const auto i = flows.index[j];
        out << io::format_g(series.t[i]) << ',' << io::format_g(flows.inflow_I1[j]) << ','
            << io::format_g(flows.inflow_I2[j]) << ',' << io::format_g(flows.inflow_I3[j]) << ','
            << io::format_g(flows.p1[j]) << ',' << io::format_g(series.alpha_obs[i]) << '\n';
    }
}

VitalRates compute_vital_rates(const VitalStatistics& v)
{
    for (double q : {v.births_per_year, v.net_migrants_per_quarter, v.days_per_quarter, v.population,
                     v.life_expectancy_male, v.life_expectancy_female, v.males_per_female}) {
        if (!(q > 0.0) || !std::isfinite(q)) {
            throw ConfigError("vital statistics must be positive");
        }
    }
    VitalRates r;
    r.birth_rate = v.births_per_year / 365.0 / v.population;
    r.migration_rate = v.net_migrants_per_quarter / v.days_per_quarter / v.population;
    r.lambda = r.birth_rate + r.migration_rate;
    const double w = 1.0 + v.males_per_female;
    const double expectancy = v.life_expectancy_male * v.males_per_female / w + v.life_expectancy_female / w;
    r.zeta = 1.0 / (expectancy * 365.0);
    return r;
}

} // namespace vaxopt::ingest
