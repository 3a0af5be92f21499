#pragma once

#include <span>
#include <vector>

namespace vaxopt::ingest {

/// Natural cubic spline through (x[i], y[i]) with strictly increasing x.
class NaturalCubicSpline {
public:
    NaturalCubicSpline(std::span<const double> x, std::span<const double> y);

    double operator()(double x) const;
    /// Second derivatives at the knots (zero at both ends).
    const std::vector<double>& second_derivatives() const { return m_; }

private:
    std::vector<double> x_, y_, m_;
};

} // namespace vaxopt::ingest
