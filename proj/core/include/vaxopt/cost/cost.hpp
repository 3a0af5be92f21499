#pragma once

#include "vaxopt/epi/model.hpp"
#include "vaxopt/epi/simulate.hpp"
#include "vaxopt/promote.hpp"

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vaxopt::cost {

struct CostParams {
    double c1 = 100.0;  // vaccination
    double c2 = 20.0;   // quarantine
    double c3 = 50.0;   // mild infection
    double c4 = 200.0;  // hospital
    double c5 = 1000.0; // ICU
    double c6 = 100.0;  // lost labour
    double psi = 0.5;   // labour share
};

void validate(const CostParams& cp);
CostParams scaled(const CostParams& cp, double factor);

template <class T>
struct BasicBreakdown {
    T vaccination{};
    T quarantine{};
    T healthcare{};
    T economic{};

    T policy() const { return vaccination + quarantine; }
    T total() const { return vaccination + quarantine + healthcare + economic; }
};

using CostBreakdown = BasicBreakdown<double>;

CostBreakdown& operator+=(CostBreakdown& a, const CostBreakdown& b);
CostBreakdown operator+(CostBreakdown a, const CostBreakdown& b);
CostBreakdown operator*(CostBreakdown a, double k);

/// Cost rates at one instant.
template <class X, class A>
BasicBreakdown<promote_t<X, A>> instantaneous_cost(const epi::BasicState<X>& x, const A& alpha, const CostParams& cp)
{
    BasicBreakdown<promote_t<X, A>> c;
    c.vaccination = cp.c1 * (alpha * alpha);
    c.quarantine = cp.c2 * x.E;
    c.healthcare = cp.c3 * x.I1 + cp.c4 * x.I2 + cp.c5 * x.I3;
    c.economic = (cp.c6 * cp.psi) * (1.0 - (x.S + x.V + x.R));
    return c;
}

/// State-only cost charged on the terminal state of a horizon (no vaccination term).
template <class X>
BasicBreakdown<X> terminal_cost(const epi::BasicState<X>& x, const CostParams& cp)
{
    BasicBreakdown<X> c;
    c.vaccination = x.E * 0.0; // a node on the same tape when X is recorded
    c.quarantine = cp.c2 * x.E;
    c.healthcare = cp.c3 * x.I1 + cp.c4 * x.I2 + cp.c5 * x.I3;
    c.economic = (cp.c6 * cp.psi) * (1.0 - (x.S + x.V + x.R));
    return c;
}

/// Left-endpoint rule over the trajectory's N steps. With include_terminal, the
/// state-only cost of the final state times dt is added.
CostBreakdown accumulate_cost(const epi::Trajectory& traj, const CostParams& cp, double dt,
                              bool include_terminal = false);

struct ExpectedCost {
    CostBreakdown mean;
    CostBreakdown standard_error; // sample std / sqrt(n); 0 for n == 1
    double total_standard_error = 0.0;
    std::size_t n = 0;
};

ExpectedCost expected_cost(std::span<const CostBreakdown> per_path);

/// Standard error of the difference of two means computed on independent samples of
/// equal size: sqrt(se_a^2 + se_b^2).
double pooled_standard_error(double se_a, double se_b);

/// Standard error of mean(b - a) for samples paired path by path (common random numbers).
/// Throws ShapeError on unequal lengths; 0 for a single pair.
double paired_standard_error(std::span<const double> a, std::span<const double> b);

nlohmann::json to_json(const CostParams& cp);
CostParams cost_params_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const CostBreakdown& b);

/// `strategy,policy_cost,healthcare_cost,economic_cost,total`
void write_breakdown_header(std::ostream& out);
void write_breakdown_row(std::ostream& out, const std::string& strategy, const CostBreakdown& b);

} // namespace vaxopt::cost
