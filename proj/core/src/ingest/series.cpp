#include "vaxopt/ingest/series.hpp"

#include "vaxopt/errors.hpp"
#include "vaxopt/ingest/spline.hpp"
#include "vaxopt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace vaxopt::ingest {

using epi::CompartmentState;
using epi::kCompartments;

std::vector<double> CompartmentSeries::interval_rates() const
{
    std::vector<double> r;
    for (std::size_t i = 0; i + 1 < size(); ++i) {
        r.push_back(rate_after(i));
    }
    return r;
}

Date CompartmentSeries::date_at(std::size_t i) const
{
    return add_days(start, std::lround(std::floor(t.at(i))));
}

namespace {

// Daily records from the first to the last date; a missing day repeats the previous record.
std::vector<RawRecord> fill_daily(const std::vector<RawRecord>& records, std::vector<std::string>& warnings)
{
    std::vector<RawRecord> out;
    for (const auto& r : records) {
        if (!out.empty()) {
            if (r.date == out.back().date) {
                warnings.push_back(format_date(r.date) + ": duplicate date, later row kept");
                out.back() = r;
                continue;
            }
            while (add_days(out.back().date, 1) < r.date) {
                RawRecord fill = out.back();
                fill.date = add_days(fill.date, 1);
                warnings.push_back(format_date(fill.date) + ": missing day carried forward");
                out.push_back(fill);
            }
        }
        out.push_back(r);
    }
    return out;
}

// Second-dose coverage on a date: latest dose record not after it.
std::int64_t doses_on(const std::vector<DoseRecord>& doses, Date d)
{
    auto it = std::upper_bound(doses.begin(), doses.end(), d,
                               [](Date x, const DoseRecord& r) { return x < r.date; });
    return it == doses.begin() ? 0 : std::prev(it)->second_dose_cum;
}

} // namespace

CompartmentSeries build_compartments(const std::vector<RawRecord>& records, const std::vector<DoseRecord>& doses,
                                     double population, const CompartmentOptions& opts)
{
    if (!(population > 0.0) || !std::isfinite(population)) {
        throw InputError("population must be positive");
    }
    CompartmentSeries s;
    s.population = population;
    if (records.empty()) {
        return s;
    }
    std::vector<RawRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(), [](const RawRecord& a, const RawRecord& b) { return a.date < b.date; });
    std::vector<DoseRecord> sorted_doses = doses;
    std::stable_sort(sorted_doses.begin(), sorted_doses.end(),
                     [](const DoseRecord& a, const DoseRecord& b) { return a.date < b.date; });
    const auto daily = fill_daily(sorted, s.warnings);
    s.start = daily.front().date;

    for (std::size_t i = 0; i < daily.size(); ++i) {
        const auto& r = daily[i];
        const std::int64_t vacc = doses_on(sorted_doses, r.date);
        for (double count : {double(r.confirmed_cum), double(r.deaths_cum), double(r.recovered_cum), double(r.hosp),
                             double(r.icu), double(r.tests), double(vacc)}) {
            if (count > population) {
                throw InputError(format_date(r.date) + ": a count exceeds the population");
            }
        }
        CompartmentState x;
        const double active = double(r.confirmed_cum - r.recovered_cum - r.deaths_cum - r.hosp - r.icu);
        if (active < 0.0) {
            s.warnings.push_back(format_date(r.date) + ": hospital and ICU exceed active cases, I1 clamped to 0");
        }
        x.V = double(vacc) / population;
        x.E = opts.exposed_scale * double(r.tests) / population;
        x.I1 = std::max(0.0, active) / population;
        x.I2 = double(r.hosp) / population;
        x.I3 = double(r.icu) / population;
        x.R = double(r.recovered_cum) / population;
        x.D = double(r.deaths_cum) / population;
        const double others = x.V + x.E + x.I1 + x.I2 + x.I3 + x.R + x.D;
        x.S = 1.0 - others;
        if (x.S < 0.0) {
            s.warnings.push_back(format_date(r.date) + ": compartments exceed the population, S clamped to 0");
            x.S = 0.0;
        }
        double alpha = 0.0;
        if (i > 0) {
            const double prev_s = s.states.back().S * population;
            const double given = double(vacc - doses_on(sorted_doses, daily[i - 1].date));
            alpha = prev_s > 0.0 ? std::max(0.0, given) / prev_s : 0.0;
        }
        s.t.push_back(static_cast<double>(i));
        s.states.push_back(x);
        s.alpha_obs.push_back(alpha);
    }
    return s;
}

std::pair<CompartmentSeries, CompartmentSeries> split_train_test(const CompartmentSeries& series, Date train_start,
                                                                 Date train_end, Date test_end)
{
    if (!(train_start <= train_end) || !(train_end <= test_end)) {
        throw InputError("split dates must satisfy train_start <= train_end <= test_end");
    }
    if (series.empty()) {
        throw InputError("cannot split an empty series");
    }
    const long first = days_between(series.start, train_start);
    const long last_train = days_between(series.start, train_end);
    const long last_test = days_between(series.start, test_end);
    if (first < 0 || last_test >= static_cast<long>(series.size())) {
        throw InputError("split dates " + format_date(train_start) + ".." + format_date(test_end) +
                         " fall outside the series");
    }
    const auto slice = [&](long a, long b) {
        CompartmentSeries out;
        out.population = series.population;
        out.start = add_days(series.start, a);
        for (long i = a; i <= b; ++i) {
            out.t.push_back(static_cast<double>(i - a));
            out.states.push_back(series.states[i]);
            out.alpha_obs.push_back(series.alpha_obs[i]);
        }
        return out;
    };
    auto train = slice(first, last_train);
    auto test = last_test > last_train ? slice(last_train + 1, last_test) : CompartmentSeries{};
    if (test.empty()) {
        test.population = series.population;
        test.start = add_days(train_end, 1);
    }
    return {std::move(train), std::move(test)};
}

CompartmentSeries augment_cubic_spline(const CompartmentSeries& series, int factor)
{
    if (factor != 1 && factor != 5 && factor != 10 && factor != 20) {
        throw ConfigError("augmentation factor must be one of 1, 5, 10, 20");
    }
    if (series.size() < 4) {
        throw InputError("augmentation needs at least four points");
    }
    if (factor == 1) {
        return series;
    }
    const std::size_t n = series.size();
    CompartmentSeries out;
    out.start = series.start;
    out.population = series.population;
    out.warnings = series.warnings;
    std::vector<NaturalCubicSpline> splines;
    std::vector<double> y(n);
    for (std::size_t k = 0; k < kCompartments; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = series.states[i][k];
        }
        splines.emplace_back(series.t, y);
    }
    bool clamped = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = series.t[i + 1] - series.t[i];
        for (int m = 0; m < factor; ++m) {
            const double tm = m == 0 ? series.t[i] : series.t[i] + h * m / factor;
            CompartmentState x;
            for (std::size_t k = 0; k < kCompartments; ++k) {
                x[k] = m == 0 ? series.states[i][k] : splines[k](tm);
                if (x[k] < 0.0) {
                    x[k] = 0.0;
                    clamped = true;
                }
            }
            out.t.push_back(tm);
            out.states.push_back(x);
            out.alpha_obs.push_back(m == 0 ? series.alpha_obs[i] : series.alpha_obs[i + 1]);
        }
    }
    out.t.push_back(series.t.back());
    out.states.push_back(series.states.back());
    out.alpha_obs.push_back(series.alpha_obs.back());
    if (clamped) {
        out.warnings.push_back("negative spline values clamped to 0");
    }
    return out;
}

std::pair<std::vector<RawRecord>, std::vector<DoseRecord>> synthesize_records(const epi::Trajectory& traj,
                                                                              double population, Date start,
                                                                              const std::string& region)
{
    const auto count = [population](double p) { return static_cast<std::int64_t>(std::llround(p * population)); };
    std::vector<RawRecord> recs;
    std::vector<DoseRecord> doses;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
        const auto& x = traj.states[i];
        RawRecord r;
        r.date = add_days(start, static_cast<long>(i));
        r.region = region;
        r.hosp = count(x.I2);
        r.icu = count(x.I3);
        r.recovered_cum = count(x.R);
        r.deaths_cum = count(x.D);
        r.confirmed_cum = count(x.I1) + r.hosp + r.icu + r.recovered_cum + r.deaths_cum;
        r.tests = count(x.E);
        DoseRecord d;
        d.date = r.date;
        d.second_dose_cum = count(x.V);
        if (!recs.empty()) {
            const auto& p = recs.back();
            r.tests_cum = p.tests_cum + r.tests;
            r.confirmed = std::max<std::int64_t>(0, r.confirmed_cum - p.confirmed_cum);
            r.deaths = std::max<std::int64_t>(0, r.deaths_cum - p.deaths_cum);
            r.recovered = std::max<std::int64_t>(0, r.recovered_cum - p.recovered_cum);
            r.hosp_cum = p.hosp_cum + std::max<std::int64_t>(0, r.hosp - p.hosp);
            r.icu_cum = p.icu_cum + std::max<std::int64_t>(0, r.icu - p.icu);
            r.vaccines = std::max<std::int64_t>(0, d.second_dose_cum - doses.back().second_dose_cum);
            r.vaccines_cum = recs.back().vaccines_cum + r.vaccines;
        }
        else {
            r.tests_cum = r.tests;
            r.confirmed = r.confirmed_cum;
            r.deaths = r.deaths_cum;
            r.recovered = r.recovered_cum;
            r.hosp_cum = r.hosp;
            r.icu_cum = r.icu;
            r.vaccines_cum = d.second_dose_cum;
        }
        d.first_dose_cum = std::min<std::int64_t>(count(std::min(1.0, x.V * 1.05)), static_cast<std::int64_t>(population));
        d.first_dose_cum = std::max(d.first_dose_cum, d.second_dose_cum);
        if (!doses.empty()) {
            d.first_dose_cum = std::max(d.first_dose_cum, doses.back().first_dose_cum);
        }
        recs.push_back(r);
        doses.push_back(d);
    }
    return {std::move(recs), std::move(doses)};
}

void write_series_csv(std::ostream& out, const CompartmentSeries& s)
{
    out << "t,S,V,E,I1,I2,I3,R,D,alpha\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << io::format_g(s.t[i]);
        for (std::size_t k = 0; k < kCompartments; ++k) {
            out << ',' << io::format_g(s.states[i][k]);
        }
        out << ',' << io::format_g(s.alpha_obs[i]) << '\n';
    }
}

void write_series_csv(const std::string& path, const CompartmentSeries& s)
{
    auto out = io::open_output(path);
    write_series_csv(out, s);
}

CompartmentSeries read_series_csv(std::istream& in, Date start, double population)
{
    CompartmentSeries s;
    s.start = start;
    s.population = population;
    std::string line;
    if (!std::getline(in, line) || split_csv_line(line).size() != 10) {
        throw InputError("series CSV must start with the header t,S,V,E,I1,I2,I3,R,D,alpha");
    }
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") {
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 10) {
            throw InputError("series CSV line " + std::to_string(lineno) + ": expected 10 columns");
        }
        double v[10];
        for (int c = 0; c < 10; ++c) {
            const auto* end = cells[c].data() + cells[c].size();
            auto [ptr, ec] = std::from_chars(cells[c].data(), end, v[c]);
            if (ec != std::errc() || ptr != end) {
                throw InputError("series CSV line " + std::to_string(lineno) + ": not a number '" + cells[c] + "'");
            }
        }
        CompartmentState x;
        for (std::size_t k = 0; k < kCompartments; ++k) {
            x[k] = v[k + 1];
        }
        epi::validate(x);
        s.t.push_back(v[0]);
        s.states.push_back(x);
        s.alpha_obs.push_back(v[9]);
    }
    return s;
}

CompartmentSeries read_series_csv(const std::string& path, Date start, double population)
{
    auto in = io::open_input(path);
    try {
        return read_series_csv(in, start, population);
    }
    catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

} // namespace vaxopt::ingest
