#pragma once

#include "vaxopt/ingest/date.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vaxopt::ingest {

/// One day of surveillance counts (persons).
struct RawRecord {
    Date date{};
    std::string region; // optional "state" column
    std::int64_t confirmed = 0, confirmed_cum = 0;
    std::int64_t deaths = 0, deaths_cum = 0;
    std::int64_t tests = 0, tests_cum = 0;
    std::int64_t recovered = 0, recovered_cum = 0;
    std::int64_t hosp = 0, hosp_cum = 0;
    std::int64_t vaccines = 0, vaccines_cum = 0;
    std::int64_t icu = 0, icu_cum = 0;

    bool operator==(const RawRecord&) const = default;
};

struct DoseRecord {
    Date date{};
    std::int64_t first_dose_cum = 0;
    std::int64_t second_dose_cum = 0;

    bool operator==(const DoseRecord&) const = default;
};

struct ParseOptions {
    /// Keep only rows whose region column equals this (case-insensitive); empty keeps all.
    std::string region;
};

struct Parsed {
    std::vector<RawRecord> records; // sorted by date
    std::size_t missing_cells = 0;
    std::vector<std::string> warnings;
};

struct ParsedDoses {
    std::vector<DoseRecord> records;
    std::vector<std::string> warnings;
};

/// Header names are matched case-insensitively. Empty numeric cells read as 0 and are
/// counted. A bad date or a negative count throws InputError naming the line.
Parsed parse_dataset(std::istream& in, const ParseOptions& opts = {});
Parsed parse_dataset(const std::string& path, const ParseOptions& opts = {});

/// `date,first_dose_cum,second_dose_cum`
ParsedDoses parse_doses(std::istream& in);
ParsedDoses parse_doses(const std::string& path);

void write_dataset(std::ostream& out, const std::vector<RawRecord>& records);
void write_doses(std::ostream& out, const std::vector<DoseRecord>& doses);

/// Splits one CSV line on commas, trimming blanks and surrounding double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

} // namespace vaxopt::ingest
