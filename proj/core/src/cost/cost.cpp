#include "vaxopt/cost/cost.hpp"

#include "vaxopt/errors.hpp"
#include "vaxopt/io.hpp"

#include <cmath>
#include <ostream>

namespace vaxopt::cost {

using nn::square;

void validate(const CostParams& cp)
{
    for (double c : {cp.c1, cp.c2, cp.c3, cp.c4, cp.c5, cp.c6, cp.psi}) {
        if (!std::isfinite(c) || c < 0.0) {
            throw ConfigError("cost weights must be finite and non-negative");
        }
    }
    if (cp.psi > 1.0) {
        throw ConfigError("labour share psi must lie in [0, 1]");
    }
}

CostParams scaled(const CostParams& cp, double factor)
{
    CostParams out = cp;
    out.c1 *= factor;
    out.c2 *= factor;
    out.c3 *= factor;
    out.c4 *= factor;
    out.c5 *= factor;
    out.c6 *= factor;
    return out;
}

CostBreakdown& operator+=(CostBreakdown& a, const CostBreakdown& b)
{
    a.vaccination += b.vaccination;
    a.quarantine += b.quarantine;
    a.healthcare += b.healthcare;
    a.economic += b.economic;
    return a;
}

CostBreakdown operator+(CostBreakdown a, const CostBreakdown& b)
{
    return a += b;
}

CostBreakdown operator*(CostBreakdown a, double k)
{
    a.vaccination *= k;
    a.quarantine *= k;
    a.healthcare *= k;
    a.economic *= k;
    return a;
}

CostBreakdown accumulate_cost(const epi::Trajectory& traj, const CostParams& cp, double dt, bool include_terminal)
{
    if (traj.states.empty()) {
        throw InputError("accumulate_cost: empty trajectory");
    }
    if (traj.states.size() < traj.alpha.size() + 1) {
        throw ShapeError("accumulate_cost: trajectory has fewer states than rates");
    }
    CostBreakdown acc;
    for (std::size_t n = 0; n < traj.alpha.size(); ++n) {
        acc += instantaneous_cost(traj.states[n], traj.alpha[n], cp) * dt;
    }
    if (include_terminal) {
        acc += terminal_cost(traj.states[traj.alpha.size()], cp) * dt;
    }
    return acc;
}

ExpectedCost expected_cost(std::span<const CostBreakdown> per_path)
{
    if (per_path.empty()) {
        throw InputError("expected_cost: no paths");
    }
    ExpectedCost out;
    out.n = per_path.size();
    const double n = static_cast<double>(out.n);
    double total_mean = 0.0;
    for (const auto& b : per_path) {
        out.mean += b;
        total_mean += b.total();
    }
    out.mean = out.mean * (1.0 / n);
    total_mean /= n;
    if (out.n == 1) {
        return out;
    }
    CostBreakdown ss;
    double total_ss = 0.0;
    for (const auto& b : per_path) {
        ss.vaccination += square(b.vaccination - out.mean.vaccination);
        ss.quarantine += square(b.quarantine - out.mean.quarantine);
        ss.healthcare += square(b.healthcare - out.mean.healthcare);
        ss.economic += square(b.economic - out.mean.economic);
        total_ss += square(b.total() - total_mean);
    }
    const auto se = [n](double s) { return std::sqrt(s / (n - 1.0)) / std::sqrt(n); };
    out.standard_error = {se(ss.vaccination), se(ss.quarantine), se(ss.healthcare), se(ss.economic)};
    out.total_standard_error = se(total_ss);
    return out;
}

double pooled_standard_error(double se_a, double se_b)
{
    return std::sqrt(se_a * se_a + se_b * se_b);
}

double paired_standard_error(std::span<const double> a, std::span<const double> b)
{
    if (a.size() != b.size()) {
        throw ShapeError("paired samples differ in length");
    }
    if (a.empty()) {
        throw InputError("no paired samples");
    }
    const std::size_t n = a.size();
    if (n == 1) {
        return 0.0;
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += b[i] - a[i];
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = b[i] - a[i] - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

nlohmann::json to_json(const CostParams& cp)
{
    return {{"c1", cp.c1}, {"c2", cp.c2}, {"c3", cp.c3}, {"c4", cp.c4},
            {"c5", cp.c5}, {"c6", cp.c6}, {"psi", cp.psi}};
}

CostParams cost_params_from_json(const nlohmann::json& doc)
{
    CostParams cp;
    try {
        cp.c1 = doc.value("c1", cp.c1);
        cp.c2 = doc.value("c2", cp.c2);
        cp.c3 = doc.value("c3", cp.c3);
        cp.c4 = doc.value("c4", cp.c4);
        cp.c5 = doc.value("c5", cp.c5);
        cp.c6 = doc.value("c6", cp.c6);
        cp.psi = doc.value("psi", cp.psi);
    }
    catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed cost parameters: ") + e.what());
    }
    validate(cp);
    return cp;
}

nlohmann::json to_json(const CostBreakdown& b)
{
    return {{"vaccination", b.vaccination}, {"quarantine", b.quarantine}, {"policy", b.policy()},
            {"healthcare", b.healthcare},   {"economic", b.economic},     {"total", b.total()}};
}

void write_breakdown_header(std::ostream& out)
{
    out << "strategy,policy_cost,healthcare_cost,economic_cost,total\n";
}

void write_breakdown_row(std::ostream& out, const std::string& strategy, const CostBreakdown& b)
{
    out << strategy << ',' << io::format_g(b.policy()) << ',' << io::format_g(b.healthcare) << ','
        << io::format_g(b.economic) << ',' << io::format_g(b.total()) << '\n';
}

} // namespace vaxopt::cost
