#include "vaxopt/ingest/records.hpp"

#include "vaxopt/errors.hpp"
#include "vaxopt/io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <istream>
#include <map>
#include <optional>
#include <ostream>

namespace vaxopt::ingest {

namespace {

std::string lower(std::string s)
{
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s)
{
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) {
        return {};
    }
    auto e = s.find_last_not_of(" \t\r\n");
    std::string t = s.substr(b, e - b + 1);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
        t = t.substr(1, t.size() - 2);
    }
    return t;
}

struct CountField {
    const char* name;
    std::int64_t RawRecord::*member;
};

constexpr std::array<CountField, 14> kCountFields = {{
    {"confirmed", &RawRecord::confirmed},
    {"confirmed_cum", &RawRecord::confirmed_cum},
    {"deaths", &RawRecord::deaths},
    {"deaths_cum", &RawRecord::deaths_cum},
    {"tests", &RawRecord::tests},
    {"tests_cum", &RawRecord::tests_cum},
    {"recovered", &RawRecord::recovered},
    {"recovered_cum", &RawRecord::recovered_cum},
    {"hosp", &RawRecord::hosp},
    {"hosp_cum", &RawRecord::hosp_cum},
    {"vaccines", &RawRecord::vaccines},
    {"vaccines_cum", &RawRecord::vaccines_cum},
    {"icu", &RawRecord::icu},
    {"icu_cum", &RawRecord::icu_cum},
}};

// Returns nullopt for an empty cell. Accepts integral values written as "12" or "12.0".
std::optional<std::int64_t> parse_count(const std::string& cell, std::size_t line, const char* column)
{
    if (cell.empty() || lower(cell) == "na" || lower(cell) == "nan") {
        return std::nullopt;
    }
    double v = 0.0;
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw InputError("line " + std::to_string(line) + ": column " + column + ": not a number '" + cell + "'");
    }
    if (v < 0.0) {
        throw InputError("line " + std::to_string(line) + ": column " + column + ": negative count");
    }
    return static_cast<std::int64_t>(v + 0.5);
}

std::map<std::string, std::size_t> header_index(const std::string& line)
{
    std::map<std::string, std::size_t> idx;
    const auto cells = split_csv_line(line);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        idx.emplace(lower(cells[i]), i);
    }
    return idx;
}

void check_monotone(const std::vector<RawRecord>& recs, std::vector<std::string>& warnings)
{
    for (std::size_t i = 1; i < recs.size(); ++i) {
        for (const auto& f : kCountFields) {
            const std::string name = f.name;
            if (name.size() > 4 && name.compare(name.size() - 4, 4, "_cum") == 0 &&
                recs[i].*f.member < recs[i - 1].*f.member) {
                warnings.push_back(format_date(recs[i].date) + ": " + name + " decreases");
            }
        }
    }
}

} // namespace

std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
        if (pos == std::string::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

Parsed parse_dataset(std::istream& in, const ParseOptions& opts)
{
    Parsed out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) {
            break;
        }
    }
    if (trim(line).empty()) {
        throw InputError("dataset has no header row");
    }
    const auto idx = header_index(line);
    if (!idx.count("date")) {
        throw InputError("dataset header lacks a 'date' column");
    }
    std::size_t present = 0;
    for (const auto& f : kCountFields) {
        present += idx.count(f.name);
    }
    if (present == 0) {
        throw InputError("dataset header names none of the expected count columns");
    }
    const auto region_col = idx.count("state") ? std::optional<std::size_t>(idx.at("state")) : std::nullopt;
    const auto want_region = lower(opts.region);

    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        const auto cell = [&](std::size_t c) { return c < cells.size() ? cells[c] : std::string(); };
        RawRecord r;
        if (region_col) {
            r.region = cell(*region_col);
        }
        if (!want_region.empty() && lower(r.region) != want_region) {
            continue;
        }
        try {
            r.date = parse_date(cell(idx.at("date")));
        }
        catch (const InputError& e) {
            throw InputError("line " + std::to_string(lineno) + ": " + e.what());
        }
        for (const auto& f : kCountFields) {
            auto it = idx.find(f.name);
            if (it == idx.end()) {
                continue;
            }
            if (auto v = parse_count(cell(it->second), lineno, f.name)) {
                r.*f.member = *v;
            }
            else {
                ++out.missing_cells;
            }
        }
        out.records.push_back(std::move(r));
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const RawRecord& a, const RawRecord& b) { return a.date < b.date; });
    if (out.missing_cells > 0) {
        out.warnings.push_back(std::to_string(out.missing_cells) + " empty numeric cells read as 0");
    }
    check_monotone(out.records, out.warnings);
    return out;
}

Parsed parse_dataset(const std::string& path, const ParseOptions& opts)
{
    auto in = io::open_input(path);
    try {
        return parse_dataset(in, opts);
    }
    catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

ParsedDoses parse_doses(std::istream& in)
{
    ParsedDoses out;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) {
        throw InputError("dose file has no header row");
    }
    ++lineno;
    const auto idx = header_index(line);
    for (const char* col : {"date", "first_dose_cum", "second_dose_cum"}) {
        if (!idx.count(col)) {
            throw InputError(std::string("dose header lacks column '") + col + "'");
        }
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) {
            continue;
        }
        const auto cells = split_csv_line(line);
        const auto cell = [&](std::size_t c) { return c < cells.size() ? cells[c] : std::string(); };
        DoseRecord d;
        try {
            d.date = parse_date(cell(idx.at("date")));
        }
        catch (const InputError& e) {
            throw InputError("line " + std::to_string(lineno) + ": " + e.what());
        }
        d.first_dose_cum = parse_count(cell(idx.at("first_dose_cum")), lineno, "first_dose_cum").value_or(0);
        d.second_dose_cum = parse_count(cell(idx.at("second_dose_cum")), lineno, "second_dose_cum").value_or(0);
        if (d.second_dose_cum > d.first_dose_cum) {
            out.warnings.push_back("line " + std::to_string(lineno) + ": second doses exceed first doses");
        }
        out.records.push_back(d);
    }
    std::stable_sort(out.records.begin(), out.records.end(),
                     [](const DoseRecord& a, const DoseRecord& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < out.records.size(); ++i) {
        if (out.records[i].second_dose_cum < out.records[i - 1].second_dose_cum ||
            out.records[i].first_dose_cum < out.records[i - 1].first_dose_cum) {
            out.warnings.push_back(format_date(out.records[i].date) + ": cumulative doses decrease");
        }
    }
    return out;
}

ParsedDoses parse_doses(const std::string& path)
{
    auto in = io::open_input(path);
    try {
        return parse_doses(in);
    }
    catch (const InputError& e) {
        throw InputError(path + ": " + e.what());
    }
}

void write_dataset(std::ostream& out, const std::vector<RawRecord>& records)
{
    out << "date,state";
    for (const auto& f : kCountFields) {
        out << ',' << f.name;
    }
    out << '\n';
    for (const auto& r : records) {
        out << format_date(r.date) << ',' << r.region;
        for (const auto& f : kCountFields) {
            out << ',' << r.*f.member;
        }
        out << '\n';
    }
}

void write_doses(std::ostream& out, const std::vector<DoseRecord>& doses)
{
    out << "date,first_dose_cum,second_dose_cum\n";
    for (const auto& d : doses) {
        out << format_date(d.date) << ',' << d.first_dose_cum << ',' << d.second_dose_cum << '\n';
    }
}

} // namespace vaxopt::ingest
