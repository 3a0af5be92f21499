#pragma once

// Scalar reverse-mode automatic differentiation.
//
// Every arithmetic operation on a Var appends one node to its Tape together with
// the local partial derivatives towards its parents. Nodes are only ever appended,
// so parents always precede children and a single reverse sweep from an output
// node yields adjoints for everything it depends on.

#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace vaxopt::nn {

enum class OpTag : std::uint8_t {
    constant,
    input,
    parameter,
    add,
    sub,
    mul,
    div,
    neg,
    dot,
    tanh,
    sigmoid,
    square,
    sqrt,
    log,
    exp,
    clamp,
};

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid until the tape is rewound past it.
class Var {
public:
    Var() = default;

    double value() const;
    std::uint32_t id() const noexcept { return id_; }
    Tape* tape() const noexcept { return tape_; }
    bool valid() const noexcept { return tape_ != nullptr; }

private:
    friend class Tape;
    Var(Tape* tape, std::uint32_t id) noexcept : tape_(tape), id_(id) {}

    Tape* tape_ = nullptr;
    std::uint32_t id_ = 0;
};

class Tape {
public:
    struct Edge {
        std::uint32_t parent;
        double partial;
    };

    Tape() { edge_begin_.push_back(0); }

    Var constant(double v) { return leaf(OpTag::constant, v); }
    Var input(double v) { return leaf(OpTag::input, v); }
    Var parameter(double v) { return leaf(OpTag::parameter, v); }

    std::size_t size() const noexcept { return values_.size(); }
    std::size_t edge_count() const noexcept { return partials_.size(); }

    double value(std::uint32_t id) const noexcept { return values_[id]; }
    double value(Var v) const noexcept { return values_[v.id()]; }
    OpTag tag(Var v) const noexcept { return tags_[v.id()]; }

    /// Parents of a node as (parent id, local partial) pairs.
    std::vector<Edge> parents(Var v) const;

    /// Adjoint of a node after the most recent backward pass (0 if never reached).
    double adjoint(Var v) const noexcept { return v.id() < adjoints_.size() ? adjoints_[v.id()] : 0.0; }

    /// Drops every node with id >= n. Adjoints of the surviving nodes are kept.
    void rewind(std::size_t n);
    void clear();

    /// Sets every adjoint to zero.
    void zero_adjoints();

    /// Full reverse sweep from a scalar output: afterwards adjoint(x) == d output / d x
    /// for every node x on the tape.
    void backward(Var output);

    /// Rejects anything but exactly one output node.
    void backward(std::span<const Var> outputs);

    /// Reverse sweep restricted to nodes with id >= floor, adding seed * d output / d x
    /// into the adjoints of every node. Nodes below the floor must be leaves; their
    /// adjoints are accumulated, not reset, which lets several graphs recorded over
    /// a shared set of parameter leaves sum their gradients.
    void accumulate_backward(Var output, std::size_t floor, double seed = 1.0);

    // Node construction. Used by the operator overloads; exposed for fused kernels.
    Var unary(OpTag tag, double value, Var a, double da)
    {
        assert(a.tape_ == this);
        parent_.push_back(a.id_);
        partials_.push_back(da);
        return push(tag, value);
    }

    Var binary(OpTag tag, double value, Var a, double da, Var b, double db)
    {
        assert(a.tape_ == this && b.tape_ == this);
        parent_.push_back(a.id_);
        partials_.push_back(da);
        parent_.push_back(b.id_);
        partials_.push_back(db);
        return push(tag, value);
    }

    /// bias + sum_i w[i] * x[i], one node with 2n+1 parents.
    Var dot(std::span<const Var> w, std::span<const Var> x, Var bias);
    /// sum_i w[i] * x[i] (no bias).
    Var dot(std::span<const Var> w, std::span<const Var> x);
    /// bias + sum_i w[i] * c[i] for constant coefficients c.
    Var dot(std::span<const Var> w, std::span<const double> c, Var bias);
    /// sum_i w[i] * c[i] for constant coefficients c.
    Var dot(std::span<const Var> w, std::span<const double> c);
    /// sum of all terms.
    Var sum(std::span<const Var> terms);

private:
    Var leaf(OpTag tag, double v) { return push(tag, v); }

    Var push(OpTag tag, double v)
    {
        const auto id = static_cast<std::uint32_t>(values_.size());
        values_.push_back(v);
        tags_.push_back(tag);
        edge_begin_.push_back(static_cast<std::uint32_t>(parent_.size()));
        return Var(this, id);
    }

    std::vector<double> values_;
    std::vector<OpTag> tags_;
    std::vector<std::uint32_t> edge_begin_; // size() + 1 entries
    std::vector<std::uint32_t> parent_;
    std::vector<double> partials_;
    std::vector<double> adjoints_;
};

inline double Var::value() const { return tape_->value(id_); }

// ---- arithmetic -------------------------------------------------------------

inline Var operator+(Var a, Var b) { return a.tape()->binary(OpTag::add, a.value() + b.value(), a, 1.0, b, 1.0); }
inline Var operator-(Var a, Var b) { return a.tape()->binary(OpTag::sub, a.value() - b.value(), a, 1.0, b, -1.0); }
inline Var operator*(Var a, Var b)
{
    const double av = a.value(), bv = b.value();
    return a.tape()->binary(OpTag::mul, av * bv, a, bv, b, av);
}
inline Var operator/(Var a, Var b)
{
    const double av = a.value(), bv = b.value();
    return a.tape()->binary(OpTag::div, av / bv, a, 1.0 / bv, b, -av / (bv * bv));
}
inline Var operator-(Var a) { return a.tape()->unary(OpTag::neg, -a.value(), a, -1.0); }

inline Var operator+(Var a, double c) { return a.tape()->unary(OpTag::add, a.value() + c, a, 1.0); }
inline Var operator+(double c, Var a) { return a + c; }
inline Var operator-(Var a, double c) { return a.tape()->unary(OpTag::sub, a.value() - c, a, 1.0); }
inline Var operator-(double c, Var a) { return a.tape()->unary(OpTag::sub, c - a.value(), a, -1.0); }
inline Var operator*(Var a, double c) { return a.tape()->unary(OpTag::mul, a.value() * c, a, c); }
inline Var operator*(double c, Var a) { return a * c; }
inline Var operator/(Var a, double c) { return a.tape()->unary(OpTag::div, a.value() / c, a, 1.0 / c); }
inline Var operator/(double c, Var a)
{
    const double av = a.value();
    return a.tape()->unary(OpTag::div, c / av, a, -c / (av * av));
}

inline Var& operator+=(Var& a, Var b) { return a = a + b; }
inline Var& operator-=(Var& a, Var b) { return a = a - b; }
inline Var& operator*=(Var& a, Var b) { return a = a * b; }
inline Var& operator+=(Var& a, double c) { return a = a + c; }
inline Var& operator*=(Var& a, double c) { return a = a * c; }

// ---- elementary functions ---------------------------------------------------

inline double sigmoid(double z)
{
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

inline Var tanh(Var a)
{
    const double t = std::tanh(a.value());
    return a.tape()->unary(OpTag::tanh, t, a, 1.0 - t * t);
}
inline Var sigmoid(Var a)
{
    const double s = sigmoid(a.value());
    return a.tape()->unary(OpTag::sigmoid, s, a, s * (1.0 - s));
}
inline Var square(Var a)
{
    const double v = a.value();
    return a.tape()->unary(OpTag::square, v * v, a, 2.0 * v);
}
inline Var sqrt(Var a)
{
    const double r = std::sqrt(a.value());
    return a.tape()->unary(OpTag::sqrt, r, a, 0.5 / r);
}
inline Var log(Var a) { return a.tape()->unary(OpTag::log, std::log(a.value()), a, 1.0 / a.value()); }
inline Var exp(Var a)
{
    const double e = std::exp(a.value());
    return a.tape()->unary(OpTag::exp, e, a, e);
}

/// Clamp to [lo, hi]; derivative 1 strictly inside, 0 on the clamped side.
inline Var clamp(Var a, double lo, double hi)
{
    const double v = a.value();
    if (v < lo) {
        return a.tape()->unary(OpTag::clamp, lo, a, 0.0);
    }
    if (v > hi) {
        return a.tape()->unary(OpTag::clamp, hi, a, 0.0);
    }
    return a.tape()->unary(OpTag::clamp, v, a, 1.0);
}

inline double square(double v) { return v * v; }
inline double clamp(double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); }

/// max(0, x) for both plain and recorded values.
inline double positive_part(double v) { return v < 0.0 ? 0.0 : v; }
inline Var positive_part(Var a) { return clamp(a, 0.0, std::numeric_limits<double>::infinity()); }

inline double value_of(double v) { return v; }
inline double value_of(Var v) { return v.value(); }

} // namespace vaxopt::nn
