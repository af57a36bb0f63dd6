#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tcm/autodiff.hpp"
#include "tcm/optim.hpp"

using namespace tcm;

TEST(Tensor, MatmulAndTranspose) {
    const Tensor a = Tensor::from_rows({{1, 2, 3}, {4, 5, 6}});
    const Tensor b = Tensor::from_rows({{1, 0}, {0, 1}, {1, 1}});
    const Tensor c = matmul(a, b);
    EXPECT_EQ(c, Tensor::from_rows({{4, 5}, {10, 11}}));
    EXPECT_EQ(transpose(a)(2, 1), 6.0);
    EXPECT_THROW(matmul(a, a), std::invalid_argument);
}

TEST(Softmax, ZerosAreUniform) {
    Tape t;
    Var v = ad::softmax(t.constant(Tensor::column({0.0, 0.0})), Axis::kCols);
    EXPECT_DOUBLE_EQ(v.value()[0], 0.5);
    EXPECT_DOUBLE_EQ(v.value()[1], 0.5);
}

TEST(Softmax, LogThreeGivesQuarterAndThreeQuarters) {
    Tape t;
    Var v = ad::softmax(t.constant(Tensor::column({0.0, std::log(3.0)})), Axis::kCols);
    // e^0 / (e^0 + 3) = 1/4, 3 / 4
    EXPECT_NEAR(v.value()[0], 0.25, 1e-12);
    EXPECT_NEAR(v.value()[1], 0.75, 1e-12);
}

TEST(Softmax, AxisSelectsDirection) {
    Tape t;
    const Tensor m = Tensor::from_rows({{0.0, 1.0}, {2.0, 5.0}});
    const Tensor cols = ad::softmax(t.constant(m), Axis::kCols).value();
    const Tensor rows = ad::softmax(t.constant(m), Axis::kRows).value();
    EXPECT_NEAR(cols(0, 0) + cols(1, 0), 1.0, 1e-12);
    EXPECT_NEAR(cols(0, 1) + cols(1, 1), 1.0, 1e-12);
    EXPECT_NEAR(rows(0, 0) + rows(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(rows(1, 0) + rows(1, 1), 1.0, 1e-12);
}

TEST(Softmax, LargeLogitsStayFinite) {
    Tape t;
    Var v = ad::softmax(t.constant(Tensor::column({1000.0, 1001.0})), Axis::kCols);
    EXPECT_TRUE(v.value().all_finite());
    EXPECT_NEAR(v.value()[1], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
}

TEST(Softmax, RejectsNonFinite) {
    Tape t;
    EXPECT_THROW(ad::softmax(t.constant(Tensor::column({0.0, NAN})), Axis::kCols), std::invalid_argument);
}

TEST(Backward, ReusedParameterAccumulates) {
    ParamStore ps;
    Parameter& p = ps.add("p", Tensor::column({3.0}));
    Tape t;
    Var x = t.param(p);
    Var y = ad::add(ad::mul(x, x), x);  // x^2 + x
    t.backward(ad::sum(y));
    EXPECT_DOUBLE_EQ(p.grad[0], 7.0);
}

TEST(Backward, SecondCallThrows) {
    ParamStore ps;
    Parameter& p = ps.add("p", Tensor::column({1.0}));
    Tape t;
    Var l = ad::sum(t.param(p));
    t.backward(l);
    EXPECT_THROW(t.backward(l), std::logic_error);
}

TEST(Backward, NonScalarLossThrows) {
    ParamStore ps;
    Parameter& p = ps.add("p", Tensor::column({1.0, 2.0}));
    Tape t;
    EXPECT_THROW(t.backward(t.param(p)), std::invalid_argument);
}

TEST(GradCheck, SquareAtThree) {
    ParamStore ps;
    Parameter& p = ps.add("theta", Tensor::column({3.0}));
    auto loss = [&](Tape& t) {
        Var x = t.param(p);
        return ad::sum(ad::mul(x, x));
    };
    const GradCheckResult r = grad_check(loss, ps);
    EXPECT_LT(r.max_relative_error, 1e-8);
    EXPECT_EQ(r.coords_checked, 1u);
}

TEST(GradCheck, ConstantLossHasZeroGradient) {
    ParamStore ps;
    std::mt19937_64 rng(1);
    Parameter& p = ps.add("w", 3, 2, rng, 0.5);
    Tape t;
    Var unused = t.param(p);
    (void)unused;
    t.backward(t.constant(Tensor(1, 1, 2.5)));
    EXPECT_DOUBLE_EQ(p.grad.squared_norm(), 0.0);
    auto loss = [](Tape& tp) { return tp.constant(Tensor(1, 1, 2.5)); };
    EXPECT_LT(grad_check(loss, ps).max_relative_error, 1e-12);
}

TEST(GradCheck, DetectsWrongGradient) {
    ParamStore ps;
    Parameter& p = ps.add("theta", Tensor::column({0.7, -1.2}));
    // value x^2 but backward claims 3x
    auto loss = [&](Tape& t) {
        Var x = t.param(p);
        Tensor v(1, 1, x.value()[0] * x.value()[0] + x.value()[1] * x.value()[1]);
        Var out = t.record(std::move(v), {x}, [x](Tape& tp, const Tensor& g) {
            Tensor& gx = tp.grad(x);
            for (std::size_t i = 0; i < 2; ++i) gx[i] += 3.0 * tp.value(x.id())[i] * g[0];
        });
        return out;
    };
    EXPECT_GT(grad_check(loss, ps).max_relative_error, 0.1);
}

TEST(ScatterAdd, SumsCollidingIndices) {
    Tape t;
    const std::size_t idx[] = {2, 0, 2};
    Var v = ad::scatter_add(t.constant(Tensor::column({0.1, 0.2, 0.3})), idx, 4);
    EXPECT_NEAR(v.value()[0], 0.2, 1e-15);
    EXPECT_NEAR(v.value()[2], 0.4, 1e-15);
    EXPECT_EQ(v.value()[1], 0.0);
    EXPECT_EQ(v.value()[3], 0.0);
}

TEST(MaskedNll, UniformOverFourIsLnFour) {
    Tape t;
    Var probs = t.constant(Tensor(4, 3, 0.25));
    const std::size_t tg[] = {0, 3, 1};
    const Real mk[] = {1, 1, 1};
    EXPECT_NEAR(ad::masked_nll(probs, tg, mk).scalar(), std::log(4.0), 1e-12);
}

TEST(MaskedNll, CertainTargetsGiveZero) {
    Tape t;
    Tensor p(3, 2);
    p(1, 0) = 1.0;
    p(2, 1) = 1.0;
    const std::size_t tg[] = {1, 2};
    const Real mk[] = {1, 1};
    EXPECT_DOUBLE_EQ(ad::masked_nll(t.constant(p), tg, mk).scalar(), 0.0);
}

TEST(Dropout, PreservesExpectationAndMasks) {
    Tape t;
    std::mt19937_64 rng(3);
    Var v = ad::dropout(t.constant(Tensor(1000, 1, 1.0)), 0.3, rng);
    std::size_t zeros = 0;
    for (std::size_t i = 0; i < 1000; ++i) {
        if (v.value()[i] == 0.0) ++zeros;
        else EXPECT_NEAR(v.value()[i], 1.0 / 0.7, 1e-12);
    }
    EXPECT_NEAR(static_cast<double>(zeros) / 1000.0, 0.3, 0.05);
}

TEST(GradDisabled, RecordsNoClosures) {
    ParamStore ps;
    Parameter& p = ps.add("p", Tensor::column({1.0}));
    Tape t;
    t.set_grad_enabled(false);
    Var x = ad::tanh(t.param(p));
    EXPECT_FALSE(t.needs_grad(x));
}
