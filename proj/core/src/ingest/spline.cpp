#include "vaxopt/ingest/spline.hpp"

#include "vaxopt/errors.hpp"

#include <algorithm>

namespace vaxopt::ingest {

NaturalCubicSpline::NaturalCubicSpline(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()), m_(x.size(), 0.0)
{
    const std::size_t n = x_.size();
    if (n != y_.size()) {
        throw ShapeError("spline: x and y lengths differ");
    }
    if (n < 3) {
        throw InputError("spline: need at least three knots");
    }
    for (std::size_t i = 1; i < n; ++i) {
        if (!(x_[i] > x_[i - 1])) {
            throw InputError("spline: knots must be strictly increasing");
        }
    }
    // Tridiagonal system for interior second derivatives, Thomas algorithm.
    const std::size_t k = n - 2;
    std::vector<double> diag(k), upper(k), rhs(k);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
        diag[i - 1] = 2.0 * (h0 + h1);
        upper[i - 1] = h1;
        rhs[i - 1] = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < k; ++i) {
        const double lower = x_[i + 1] - x_[i]; // sub-diagonal entry of row i
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = k; i-- > 0;) {
        const double next = i + 1 < k ? m_[i + 2] : 0.0;
        m_[i + 1] = (rhs[i] - upper[i] * next) / diag[i];
    }
}

double NaturalCubicSpline::operator()(double x) const
{
    const std::size_t n = x_.size();
    std::size_t i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin());
    i = std::clamp<std::size_t>(i, 1, n - 1) - 1;
    if (x == x_[i]) {
        return y_[i];
    }
    if (x == x_[i + 1]) {
        return y_[i + 1];
    }
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
    return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

} // namespace vaxopt::ingest
