// Writes a synthetic surveillance fixture: the deterministic model run from the
// 2021-10-04 state under a hump-shaped vaccination campaign, reported daily.

#include "vaxopt/epi/model.hpp"
#include "vaxopt/errors.hpp"
#include "vaxopt/epi/simulate.hpp"
#include "vaxopt/ingest/date.hpp"
#include "vaxopt/ingest/records.hpp"
#include "vaxopt/ingest/series.hpp"
#include "vaxopt/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <iostream>

namespace {

double campaign_rate(double day)
{
    const double u = (day - 12.0) / 12.0;
    return 0.004 + 0.026 * std::exp(-u * u);
}

} // namespace

int main(int argc, char** argv)
{
    using namespace vaxopt;

    CLI::App app{"Generate the synthetic surveillance fixture"};
    std::string out = "data/fixture";
    std::string start_text = "2021-10-04";
    std::string end_text = "2021-12-31";
    double population = 6555000.0;
    int substeps = 100;
    app.add_option("--out", out, "output directory");
    app.add_option("--start", start_text, "first date");
    app.add_option("--end", end_text, "last date");
    app.add_option("--population", population, "population size");
    app.add_option("--substeps", substeps, "integration steps per day")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    try {
        const auto start = ingest::parse_date(start_text);
        const auto days = ingest::days_between(start, ingest::parse_date(end_text));
        if (days < 1) {
            throw InputError("end date must follow the start date");
        }
        const double dt = 1.0 / substeps;
        const auto policy = [substeps](std::size_t n, const epi::CompartmentState&) {
            return campaign_rate(static_cast<double>(n / static_cast<std::size_t>(substeps)));
        };
        const auto fine = epi::simulate_ode(epi::baseline_train_state(), policy, epi::baseline_params(),
                                            {dt, static_cast<std::size_t>(days * substeps)});

        epi::Trajectory daily;
        std::vector<double> administered(1, 0.0); // gross S -> V flow, cumulative proportion
        for (long d = 0; d <= days; ++d) {
            daily.states.push_back(fine.states[static_cast<std::size_t>(d * substeps)]);
            if (d == days) {
                break;
            }
            double inflow = 0.0;
            for (int k = 0; k < substeps; ++k) {
                const auto n = static_cast<std::size_t>(d * substeps + k);
                inflow += fine.alpha[n] * fine.states[n].S * dt;
            }
            daily.alpha.push_back(campaign_rate(static_cast<double>(d)));
            administered.push_back(administered.back() + inflow);
        }

        auto [records, doses] = ingest::synthesize_records(daily, population, start, "VIC");
        const auto base = static_cast<double>(doses.front().second_dose_cum);
        for (std::size_t i = 0; i < doses.size(); ++i) {
            doses[i].second_dose_cum = static_cast<std::int64_t>(std::llround(base + administered[i] * population));
            doses[i].first_dose_cum = std::max(doses[i].first_dose_cum, doses[i].second_dose_cum);
            if (i > 0) {
                doses[i].first_dose_cum = std::max(doses[i].first_dose_cum, doses[i - 1].first_dose_cum);
                records[i].vaccines = doses[i].second_dose_cum - doses[i - 1].second_dose_cum;
                records[i].vaccines_cum = records[i - 1].vaccines_cum + records[i].vaccines;
            }
        }

        io::ensure_directory(out);
        {
            auto f = io::open_output((std::filesystem::path(out) / "dataset.csv").string());
            ingest::write_dataset(f, records);
        }
        {
            auto f = io::open_output((std::filesystem::path(out) / "doses.csv").string());
            ingest::write_doses(f, doses);
        }
        std::cout << "wrote " << records.size() << " days to " << out << '\n';
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
