#include "vaxopt/analysis/report.hpp"

#include "vaxopt/errors.hpp"
#include "vaxopt/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>

namespace vaxopt::analysis {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string fixed(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

struct Axis {
    double lo = 0.0;
    double hi = 1.0;
};

Axis padded(double lo, double hi)
{
    if (!(hi > lo)) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        return {lo - pad, hi + pad};
    }
    const double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

double plot_w() { return kWidth - kLeft - kRight; }
double plot_h() { return kHeight - kTop - kBottom; }

double y_px(const Axis& a, double v)
{
    return kTop + plot_h() * (a.hi - v) / (a.hi - a.lo);
}

void open_svg(std::ostream& out, const std::string& title, const nlohmann::json& metadata)
{
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fixed(kWidth) << "\" height=\"" << fixed(kHeight)
        << "\" viewBox=\"0 0 " << fixed(kWidth) << ' ' << fixed(kHeight) << "\" font-family=\"sans-serif\">\n";
    if (!metadata.is_null()) {
        out << "<metadata>" << escape(metadata.dump()) << "</metadata>\n";
    }
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << fixed(kWidth / 2.0) << "\" y=\"24.00\" text-anchor=\"middle\" font-size=\"16\">"
        << escape(title) << "</text>\n";
}

void y_axis(std::ostream& out, const Axis& a, const std::string& label)
{
    out << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(kTop) << "\" x2=\"" << fixed(kLeft) << "\" y2=\""
        << fixed(kTop + plot_h()) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = a.lo + (a.hi - a.lo) * k / 4.0;
        const double y = y_px(a, v);
        out << "<line x1=\"" << fixed(kLeft - 4.0) << "\" y1=\"" << fixed(y) << "\" x2=\"" << fixed(kLeft)
            << "\" y2=\"" << fixed(y) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << fixed(kLeft - 6.0) << "\" y=\"" << fixed(y + 4.0)
            << "\" text-anchor=\"end\" font-size=\"11\">" << escape(io::format_g(v, 4)) << "</text>\n";
    }
    out << "<text x=\"16.00\" y=\"" << fixed(kTop + plot_h() / 2.0) << "\" font-size=\"12\" transform=\"rotate(-90 16.00 "
        << fixed(kTop + plot_h() / 2.0) << ")\" text-anchor=\"middle\">" << escape(label) << "</text>\n";
}

void legend(std::ostream& out, const std::vector<std::string>& labels)
{
    const double x = kWidth - kRight + 16.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double y = kTop + 10.0 + 18.0 * static_cast<double>(i);
        out << "<rect x=\"" << fixed(x) << "\" y=\"" << fixed(y - 9.0) << "\" width=\"12.00\" height=\"12.00\" fill=\""
            << kPalette[i % kPalette.size()] << "\"/>\n";
        out << "<text x=\"" << fixed(x + 18.0) << "\" y=\"" << fixed(y + 1.0) << "\" font-size=\"11\">"
            << escape(labels[i]) << "</text>\n";
    }
}

const LevelResult* first_ok(const SweepResult& r)
{
    for (const auto& l : r.levels) {
        if (l.ok) {
            return &l;
        }
    }
    return nullptr;
}

std::string level_label(double level)
{
    return "x" + io::format_g(level, 4);
}

std::string level_label(const SweepResult& r, double level)
{
    return r.spec.target == SweepTarget::initial_vaccinated ? "V=" + io::format_g(level, 4) : level_label(level);
}

template <class Fn>
void write_file(const std::string& dir, const std::string& name, std::vector<std::string>& written, Fn&& fn)
{
    auto out = io::open_output((std::filesystem::path(dir) / name).string());
    fn(out);
    out.flush();
    if (!out) {
        throw InputError("failed writing '" + (std::filesystem::path(dir) / name).string() + "'");
    }
    written.push_back(name);
}

} // namespace

void write_sweep_csv(std::ostream& out, const SweepResult& r)
{
    out << "level,policy_cost,healthcare_cost,economic_cost,total\n";
    for (const auto& l : r.levels) {
        if (!l.ok) {
            continue;
        }
        const auto& m = l.optimal.expected.mean;
        out << io::format_g(l.level) << ',' << io::format_g(m.policy()) << ',' << io::format_g(m.healthcare) << ','
            << io::format_g(m.economic) << ',' << io::format_g(m.total()) << '\n';
    }
}

void write_savings_csv(std::ostream& out, const SweepResult& r)
{
    out << "level,policy_savings,healthcare_savings,economic_savings\n";
    for (const auto& l : r.levels) {
        if (!l.ok) {
            continue;
        }
        out << io::format_g(l.level) << ',' << io::format_g(l.savings.policy()) << ','
            << io::format_g(l.savings.healthcare) << ',' << io::format_g(l.savings.economic) << '\n';
    }
}

void write_comparison_csv(std::ostream& out, const std::vector<StrategyRow>& rows)
{
    cost::write_breakdown_header(out);
    for (const auto& r : rows) {
        cost::write_breakdown_row(out, r.name, r.cost);
    }
}

void write_line_svg(std::ostream& out, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<Series>& series, const nlohmann::json& metadata)
{
    double lo = INFINITY, hi = -INFINITY;
    std::size_t len = 0;
    for (const auto& s : series) {
        for (double v : s.y) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        len = std::max(len, s.y.size());
    }
    if (len == 0) {
        lo = 0.0;
        hi = 1.0;
    }
    const Axis a = padded(lo, hi);
    const double span = len > 1 ? static_cast<double>(len - 1) : 1.0;

    open_svg(out, title, metadata);
    y_axis(out, a, y_label);
    const double base = kTop + plot_h();
    out << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(base) << "\" x2=\"" << fixed(kLeft + plot_w())
        << "\" y2=\"" << fixed(base) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double v = span * k / 4.0;
        const double x = kLeft + plot_w() * k / 4.0;
        out << "<text x=\"" << fixed(x) << "\" y=\"" << fixed(base + 16.0) << "\" text-anchor=\"middle\" font-size=\"11\">"
            << escape(io::format_g(v, 4)) << "</text>\n";
    }
    out << "<text x=\"" << fixed(kLeft + plot_w() / 2.0) << "\" y=\"" << fixed(kHeight - 10.0)
        << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(x_label) << "</text>\n";

    std::vector<std::string> labels;
    for (std::size_t i = 0; i < series.size(); ++i) {
        labels.push_back(series[i].label);
        if (series[i].y.empty()) {
            continue;
        }
        out << "<polyline fill=\"none\" stroke-width=\"2\" stroke=\"" << kPalette[i % kPalette.size()]
            << "\" points=\"";
        for (std::size_t n = 0; n < series[i].y.size(); ++n) {
            const double x = kLeft + plot_w() * static_cast<double>(n) / span;
            out << (n ? " " : "") << fixed(x) << ',' << fixed(y_px(a, series[i].y[n]));
        }
        out << "\"/>\n";
    }
    legend(out, labels);
    out << "</svg>\n";
}

void write_stacked_svg(std::ostream& out, const std::string& title, const std::vector<StackedBar>& bars,
                       const nlohmann::json& metadata)
{
    double lo = 0.0, hi = 0.0;
    for (const auto& b : bars) {
        double pos = 0.0, neg = 0.0;
        for (double v : {b.policy, b.healthcare, b.economic}) {
            (v >= 0.0 ? pos : neg) += v;
        }
        hi = std::max(hi, pos);
        lo = std::min(lo, neg);
    }
    const Axis a = padded(lo, hi);

    open_svg(out, title, metadata);
    y_axis(out, a, "expected cost");
    const double zero = y_px(a, 0.0);
    out << "<line x1=\"" << fixed(kLeft) << "\" y1=\"" << fixed(zero) << "\" x2=\"" << fixed(kLeft + plot_w())
        << "\" y2=\"" << fixed(zero) << "\" stroke=\"black\"/>\n";

    const double slot = bars.empty() ? plot_w() : plot_w() / static_cast<double>(bars.size());
    const double width = slot * 0.6;
    for (std::size_t i = 0; i < bars.size(); ++i) {
        const auto& b = bars[i];
        const double x = kLeft + slot * static_cast<double>(i) + (slot - width) / 2.0;
        double up = 0.0, down = 0.0;
        const std::array<double, 3> parts = {b.policy, b.healthcare, b.economic};
        for (std::size_t k = 0; k < parts.size(); ++k) {
            const double v = parts[k];
            double from, to;
            if (v >= 0.0) {
                from = up;
                to = up += v;
            }
            else {
                from = down;
                to = down += v;
            }
            const double y0 = y_px(a, std::max(from, to));
            const double y1 = y_px(a, std::min(from, to));
            out << "<rect x=\"" << fixed(x) << "\" y=\"" << fixed(y0) << "\" width=\"" << fixed(width)
                << "\" height=\"" << fixed(y1 - y0) << "\" fill=\"" << kPalette[k] << "\"><title>"
                << escape(b.label) << ": " << io::format_g(v, 4) << "</title></rect>\n";
        }
        out << "<text x=\"" << fixed(x + width / 2.0) << "\" y=\"" << fixed(kHeight - 30.0)
            << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(b.label) << "</text>\n";
        out << "<text x=\"" << fixed(x + width / 2.0) << "\" y=\"" << fixed(y_px(a, up) - 4.0)
            << "\" text-anchor=\"middle\" font-size=\"10\">" << escape(io::format_g(up + down, 4)) << "</text>\n";
    }
    legend(out, {"policy", "healthcare", "economic"});
    out << "</svg>\n";
}

std::vector<std::string> emit_report(const Report& report, const std::string& dir)
{
    if (report.strategies.empty() && report.sweeps.empty()) {
        throw InputError("nothing to report");
    }
    for (const auto& s : report.sweeps) {
        if (s.levels.empty()) {
            throw InputError("sweep '" + to_string(s.spec.target) + "' has no levels");
        }
    }
    io::ensure_directory(dir);
    std::vector<std::string> written;

    if (!report.strategies.empty()) {
        write_file(dir, "strategy_comparison.csv", written,
                   [&](std::ostream& out) { write_comparison_csv(out, report.strategies); });
        std::vector<Series> series;
        std::vector<StackedBar> bars;
        for (const auto& r : report.strategies) {
            if (!r.alpha.empty()) {
                series.push_back({r.name, r.alpha});
            }
            bars.push_back({r.name, r.cost.policy(), r.cost.healthcare, r.cost.economic});
        }
        write_file(dir, "strategy_alpha.svg", written, [&](std::ostream& out) {
            write_line_svg(out, "Vaccination rate by strategy", "day", "alpha", series, report.config);
        });
        write_file(dir, "strategy_costs.svg", written, [&](std::ostream& out) {
            write_stacked_svg(out, "Expected expenditure by strategy", bars, report.config);
        });
    }

    for (const auto& s : report.sweeps) {
        const std::string t = to_string(s.spec.target);
        write_file(dir, "sweep_" + t + ".csv", written, [&](std::ostream& out) { write_sweep_csv(out, s); });
        write_file(dir, "savings_" + t + ".csv", written, [&](std::ostream& out) { write_savings_csv(out, s); });
        std::vector<Series> series;
        std::vector<StackedBar> bars;
        for (const auto& l : s.levels) {
            if (!l.ok) {
                continue;
            }
            const auto label = level_label(s, l.level);
            series.push_back({label, l.alpha});
            const auto& m = l.optimal.expected.mean;
            bars.push_back({label, m.policy(), m.healthcare, m.economic});
        }
        const auto* any = first_ok(s);
        nlohmann::json meta = {{"config", report.config}, {"sweep", to_json(s.spec)}};
        write_file(dir, "sweep_" + t + "_alpha.svg", written, [&](std::ostream& out) {
            write_line_svg(out, "Optimal vaccination rate, " + t + " sweep", "day", "alpha", series, meta);
        });
        write_file(dir, "sweep_" + t + "_costs.svg", written, [&](std::ostream& out) {
            write_stacked_svg(out, any ? "Optimal expenditure, " + t + " sweep" : "No level succeeded, " + t + " sweep",
                              bars, meta);
        });
    }

    write_file(dir, "run_config.json", written, [&](std::ostream& out) { out << report.config.dump(2) << '\n'; });
    return written;
}

} // namespace vaxopt::analysis
