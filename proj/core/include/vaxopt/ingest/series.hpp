#pragma once

#include "vaxopt/epi/model.hpp"
#include "vaxopt/epi/simulate.hpp"
#include "vaxopt/ingest/date.hpp"
#include "vaxopt/ingest/records.hpp"

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace vaxopt::ingest {

/// Compartment proportions on an evenly spaced grid starting at `start`.
///
/// t[i] is the offset in days from `start` (integral for daily data, fractional after
/// augmentation). alpha_obs[i] is the rate observed over the interval ending at t[i];
/// the rate applying over [t[i], t[i+1]) is therefore rate_after(i).
struct CompartmentSeries {
    Date start{};
    std::vector<double> t;
    std::vector<epi::CompartmentState> states;
    std::vector<double> alpha_obs;
    double population = 0.0;
    std::vector<std::string> warnings;

    std::size_t size() const { return states.size(); }
    bool empty() const { return states.empty(); }
    double spacing() const { return t.size() >= 2 ? t[1] - t[0] : 1.0; }
    double rate_after(std::size_t i) const { return alpha_obs[std::min(i + 1, alpha_obs.size() - 1)]; }
    /// Rates over the size()-1 intervals.
    std::vector<double> interval_rates() const;
    Date date_at(std::size_t i) const;
};

/// Fraction of daily tests treated as exposed, and who counts as eligible for a dose.
struct CompartmentOptions {
    double exposed_scale = 1.0;
};

/// Gaps between record dates are filled by carrying the previous record forward.
/// Throws InputError when population is not positive or smaller than a count.
CompartmentSeries build_compartments(const std::vector<RawRecord>& records, const std::vector<DoseRecord>& doses,
                                     double population, const CompartmentOptions& opts = {});

/// Inclusive train window, test window (train_end, test_end].
std::pair<CompartmentSeries, CompartmentSeries> split_train_test(const CompartmentSeries& series, Date train_start,
                                                                 Date train_end, Date test_end);

/// Natural cubic spline per compartment at `factor` points per original interval.
CompartmentSeries augment_cubic_spline(const CompartmentSeries& series, int factor);

/// Inverse of build_compartments for a daily trajectory: counts are proportions times
/// population, rounded. Cumulative doses track the vaccinated compartment.
std::pair<std::vector<RawRecord>, std::vector<DoseRecord>> synthesize_records(const epi::Trajectory& traj,
                                                                              double population, Date start,
                                                                              const std::string& region = "");

/// Same columns as the trajectory export, one row per point, alpha_obs in the last column.
void write_series_csv(std::ostream& out, const CompartmentSeries& s);
void write_series_csv(const std::string& path, const CompartmentSeries& s);
CompartmentSeries read_series_csv(std::istream& in, Date start, double population);
CompartmentSeries read_series_csv(const std::string& path, Date start, double population);

} // namespace vaxopt::ingest
