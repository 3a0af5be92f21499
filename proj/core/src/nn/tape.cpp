#include "vaxopt/nn/tape.hpp"

#include "vaxopt/errors.hpp"

#include <algorithm>
#include <string>

namespace vaxopt::nn {

std::vector<Tape::Edge> Tape::parents(Var v) const
{
    std::vector<Edge> out;
    for (auto e = edge_begin_[v.id()]; e < edge_begin_[v.id() + 1]; ++e) {
        out.push_back({parent_[e], partials_[e]});
    }
    return out;
}

void Tape::rewind(std::size_t n)
{
    if (n >= values_.size()) {
        return;
    }
    const auto edges = edge_begin_[n];
    values_.resize(n);
    tags_.resize(n);
    edge_begin_.resize(n + 1);
    parent_.resize(edges);
    partials_.resize(edges);
    if (adjoints_.size() > n) {
        adjoints_.resize(n);
    }
}

void Tape::clear()
{
    values_.clear();
    tags_.clear();
    edge_begin_.assign(1, 0);
    parent_.clear();
    partials_.clear();
    adjoints_.clear();
}

void Tape::zero_adjoints()
{
    std::fill(adjoints_.begin(), adjoints_.end(), 0.0);
}

void Tape::backward(Var output)
{
    adjoints_.assign(values_.size(), 0.0);
    accumulate_backward(output, 0, 1.0);
}

void Tape::backward(std::span<const Var> outputs)
{
    if (outputs.size() != 1) {
        throw ShapeError("backward requires a scalar output, got " + std::to_string(outputs.size()) + " nodes");
    }
    backward(outputs[0]);
}

void Tape::accumulate_backward(Var output, std::size_t floor, double seed)
{
    assert(output.tape() == this);
    const std::size_t top = output.id();
    if (adjoints_.size() < values_.size()) {
        adjoints_.resize(values_.size(), 0.0);
    }
    std::fill(adjoints_.begin() + static_cast<std::ptrdiff_t>(floor), adjoints_.begin() + static_cast<std::ptrdiff_t>(top) + 1,
              0.0);
    adjoints_[top] = seed;

    double* adj = adjoints_.data();
    const std::uint32_t* par = parent_.data();
    const double* part = partials_.data();
    for (std::size_t i = top + 1; i-- > floor;) {
        const double a = adj[i];
        if (a == 0.0) {
            continue;
        }
        for (auto e = edge_begin_[i], end = edge_begin_[i + 1]; e < end; ++e) {
            adj[par[e]] += a * part[e];
        }
    }
}

Var Tape::dot(std::span<const Var> w, std::span<const Var> x, Var bias)
{
    assert(w.size() == x.size());
    double acc = bias.value();
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double wv = values_[w[i].id()], xv = values_[x[i].id()];
        acc += wv * xv;
        parent_.push_back(w[i].id());
        partials_.push_back(xv);
        parent_.push_back(x[i].id());
        partials_.push_back(wv);
    }
    parent_.push_back(bias.id());
    partials_.push_back(1.0);
    return push(OpTag::dot, acc);
}

Var Tape::dot(std::span<const Var> w, std::span<const Var> x)
{
    assert(w.size() == x.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double wv = values_[w[i].id()], xv = values_[x[i].id()];
        acc += wv * xv;
        parent_.push_back(w[i].id());
        partials_.push_back(xv);
        parent_.push_back(x[i].id());
        partials_.push_back(wv);
    }
    return push(OpTag::dot, acc);
}

Var Tape::dot(std::span<const Var> w, std::span<const double> c, Var bias)
{
    assert(w.size() == c.size());
    double acc = bias.value();
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += values_[w[i].id()] * c[i];
        parent_.push_back(w[i].id());
        partials_.push_back(c[i]);
    }
    parent_.push_back(bias.id());
    partials_.push_back(1.0);
    return push(OpTag::dot, acc);
}

Var Tape::dot(std::span<const Var> w, std::span<const double> c)
{
    assert(w.size() == c.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        acc += values_[w[i].id()] * c[i];
        parent_.push_back(w[i].id());
        partials_.push_back(c[i]);
    }
    return push(OpTag::dot, acc);
}

Var Tape::sum(std::span<const Var> terms)
{
    double acc = 0.0;
    for (const auto& t : terms) {
        acc += values_[t.id()];
        parent_.push_back(t.id());
        partials_.push_back(1.0);
    }
    return push(OpTag::add, acc);
}

} // namespace vaxopt::nn
