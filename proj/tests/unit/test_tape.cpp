#include "vaxopt/errors.hpp"
#include "vaxopt/nn/tape.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace vaxopt::nn;

TEST(Tape, SquareDerivative)
{
    Tape tape;
    auto x = tape.input(3.0);
    auto y = square(x);
    tape.backward(y);
    EXPECT_DOUBLE_EQ(y.value(), 9.0);
    EXPECT_DOUBLE_EQ(tape.adjoint(x), 6.0);
}

TEST(Tape, TanhSlopeAtZero)
{
    Tape tape;
    auto x = tape.input(0.0);
    tape.backward(tanh(x));
    EXPECT_DOUBLE_EQ(tape.adjoint(x), 1.0);
}

TEST(Tape, ParentsPrecedeChildren)
{
    Tape tape;
    auto a = tape.parameter(0.3);
    auto b = tape.input(-1.2);
    auto c = sigmoid(a * b + a) / (1.0 + square(b));
    std::vector<Var> nodes{a, b, c};
    for (const auto& n : nodes) {
        for (const auto& e : tape.parents(n)) {
            EXPECT_LT(e.parent, n.id());
        }
    }
}

TEST(Tape, ElementaryPartials)
{
    const double x0 = 0.7;
    const auto check = [&](auto f, double expected) {
        Tape tape;
        auto x = tape.input(x0);
        tape.backward(f(x));
        EXPECT_NEAR(tape.adjoint(x), expected, 1e-12);
    };
    check([](Var x) { return sqrt(x); }, 0.5 / std::sqrt(x0));
    check([](Var x) { return log(x); }, 1.0 / x0);
    check([](Var x) { return exp(x); }, std::exp(x0));
    check([](Var x) { return 2.0 / x; }, -2.0 / (x0 * x0));
    check([](Var x) { return x / 4.0; }, 0.25);
    check([](Var x) { return 1.0 - x; }, -1.0);
    check([](Var x) { return -x; }, -1.0);
    check([](Var x) { return x * x * x; }, 3.0 * x0 * x0);
    check([](Var x) { return clamp(x, 0.0, 0.5); }, 0.0);
    check([](Var x) { return clamp(x, 0.0, 1.0); }, 1.0);
    const double s = 1.0 / (1.0 + std::exp(-x0));
    check([](Var x) { return sigmoid(x); }, s * (1.0 - s));
}

TEST(Tape, DotMatchesExpandedForm)
{
    Tape tape;
    std::vector<Var> w{tape.parameter(0.5), tape.parameter(-1.5)};
    std::vector<Var> x{tape.input(2.0), tape.input(3.0)};
    auto b = tape.parameter(0.25);
    auto y = tape.dot(w, x, b);
    EXPECT_DOUBLE_EQ(y.value(), 0.5 * 2.0 - 1.5 * 3.0 + 0.25);
    tape.backward(y);
    EXPECT_DOUBLE_EQ(tape.adjoint(w[0]), 2.0);
    EXPECT_DOUBLE_EQ(tape.adjoint(w[1]), 3.0);
    EXPECT_DOUBLE_EQ(tape.adjoint(x[0]), 0.5);
    EXPECT_DOUBLE_EQ(tape.adjoint(x[1]), -1.5);
    EXPECT_DOUBLE_EQ(tape.adjoint(b), 1.0);
}

TEST(Tape, AccumulateSumsAcrossRewoundGraphs)
{
    Tape tape;
    auto p = tape.parameter(2.0);
    const auto floor = tape.size();
    tape.zero_adjoints();
    for (double c : {1.0, 3.0}) {
        auto y = square(p * c);
        tape.accumulate_backward(y, floor);
        tape.rewind(floor);
    }
    // d/dp (p^2 + 9 p^2) = 20 p
    EXPECT_DOUBLE_EQ(tape.adjoint(p), 40.0);
}

TEST(Tape, RejectsNonScalarBackward)
{
    Tape tape;
    std::vector<Var> outs{tape.input(1.0), tape.input(2.0)};
    EXPECT_THROW(tape.backward(std::span<const Var>(outs)), vaxopt::ShapeError);
}
