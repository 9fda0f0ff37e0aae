#include "gradcheck.hpp"
#include "oracles.hpp"

#include <adnet/adam.hpp>
#include <adnet/tape.hpp>
#include <adnet/tensor.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace adnet;

namespace {

Tensor2 row(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor2(1, n, std::move(v));
}

std::vector<double> values_of(const Tensor2& t) { return {t.values().begin(), t.values().end()}; }

} // namespace

TEST(Conv1d, IdentityKernel) {
    const Tensor2 x = Tensor2::from_rows({{0.5, -1.0, 2.0, 3.5}});
    EXPECT_EQ(ops::conv1d_dilated(x, row({1.0}), Tensor2(1, 1), 1, 1), x);
}

TEST(Conv1d, SlidingSumDilationOne) {
    const Tensor2 out = ops::conv1d_dilated(row({1, 2, 3, 4}), row({1, 1, 1}), Tensor2(1, 1), 3, 1);
    EXPECT_EQ(values_of(out), (std::vector<double>{3, 6, 9, 7}));
}

TEST(Conv1d, SlidingSumDilationTwo) {
    const Tensor2 out = ops::conv1d_dilated(row({1, 2, 3, 4}), row({1, 1, 1}), Tensor2(1, 1), 3, 2);
    EXPECT_EQ(values_of(out), (std::vector<double>{4, 6, 4, 6}));
}

TEST(Conv1d, MatchesDirectDefinition) {
    std::mt19937_64 rng(3);
    for (std::size_t K : {1u, 3u, 5u}) {
        for (std::size_t d : {1u, 2u, 8u, 64u}) {
            const Tensor2 x = gradcheck::random_tensor(rng, 3, 11);
            const Tensor2 k = gradcheck::random_tensor(rng, 2, 3 * K);
            const Tensor2 b = gradcheck::random_tensor(rng, 2, 1);
            const Tensor2 got = ops::conv1d_dilated(x, k, b, K, d);
            const Tensor2 want = oracle::conv_direct(x, k, b, K, d);
            for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got.values()[i], want.values()[i], 1e-12);
        }
    }
}

TEST(Conv1d, PreservesLength) {
    std::mt19937_64 rng(5);
    for (std::size_t T : {1u, 2u, 7u, 64u, 100u}) {
        for (std::size_t K : {1u, 3u, 5u}) {
            for (std::size_t d = 1; d <= 1024; d *= 2) {
                const Tensor2 out = ops::conv1d_dilated(gradcheck::random_tensor(rng, 2, T),
                                                        gradcheck::random_tensor(rng, 3, 2 * K), Tensor2(3, 1), K, d);
                ASSERT_EQ(out.length(), T);
                ASSERT_EQ(out.channels(), 3u);
            }
        }
    }
}

TEST(Conv1d, LinearWithoutBias) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        const Tensor2 x = gradcheck::random_tensor(rng, 3, 16);
        const Tensor2 y = gradcheck::random_tensor(rng, 3, 16);
        const Tensor2 k = gradcheck::random_tensor(rng, 4, 9);
        const double a = 1.7, b = -0.4;
        Tensor2 mix(3, 16);
        for (std::size_t i = 0; i < mix.size(); ++i) mix.values()[i] = a * x.values()[i] + b * y.values()[i];
        const Tensor2 lhs = ops::conv1d_dilated(mix, k, Tensor2(4, 1), 3, 4);
        const Tensor2 cx = ops::conv1d_dilated(x, k, Tensor2(4, 1), 3, 4);
        const Tensor2 cy = ops::conv1d_dilated(y, k, Tensor2(4, 1), 3, 4);
        for (std::size_t i = 0; i < lhs.size(); ++i)
            EXPECT_NEAR(lhs.values()[i], a * cx.values()[i] + b * cy.values()[i], 1e-12);
    }
}

TEST(Conv1d, RejectsShapeMismatch) {
    EXPECT_THROW(ops::conv1d_dilated(Tensor2(2, 4), Tensor2(1, 3), Tensor2(1, 1), 3, 1), ConfigError);
    EXPECT_THROW(ops::conv1d_dilated(Tensor2(1, 4), Tensor2(1, 3), Tensor2(2, 1), 3, 1), ConfigError);
}

TEST(Pointwise, Examples) {
    const Tensor2 x = Tensor2::from_rows({{1, 2}, {3, 4}});
    EXPECT_EQ(ops::pointwise_conv(x, Tensor2::from_rows({{1, 0}, {0, 1}}), Tensor2(2, 1)), x);
    EXPECT_EQ(values_of(ops::pointwise_conv(x, Tensor2::from_rows({{1, 1}}), Tensor2(1, 1))), (std::vector<double>{4, 6}));
    const Tensor2 c = ops::pointwise_conv(x, Tensor2(1, 2), Tensor2(1, 1, 2.5));
    EXPECT_EQ(values_of(c), (std::vector<double>{2.5, 2.5}));
    EXPECT_THROW(ops::pointwise_conv(x, Tensor2(1, 3), Tensor2(1, 1)), ConfigError);
}

TEST(Elementwise, Examples) {
    EXPECT_EQ(values_of(ops::relu(row({-1, 0, 2}))), (std::vector<double>{0, 0, 2}));
    EXPECT_EQ(ops::sigmoid(row({0})).values()[0], 0.5);
    const std::vector<double> mask{1, 0};
    EXPECT_EQ(ops::mask_mul(Tensor2::from_rows({{5, 7}, {3, 9}}), mask), Tensor2::from_rows({{5, 0}, {3, 0}}));
    EXPECT_THROW(ops::mask_mul(Tensor2(2, 3), mask), ConfigError);
    EXPECT_THROW(ops::add(Tensor2(2, 3), Tensor2(3, 2)), ConfigError);
}

TEST(Elementwise, SigmoidStaysFiniteAndBounded) {
    const Tensor2 s = ops::sigmoid(row({-1e6, -745.0, 0.0, 745.0, 1e6}));
    EXPECT_TRUE(all_finite(s));
    for (double v : s.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Backward, SigmoidAtZero) {
    ParamTensor w(Tensor2(1, 1, 0.0));
    ParamTensor b(Tensor2(1, 1, 0.0));
    Tape tape;
    const Var x = tape.input(Tensor2(1, 1, 1.0));
    tape.backward(tape.sigmoid(tape.pointwise(x, w, b)));
    EXPECT_DOUBLE_EQ(w.grad(0, 0), 0.25);
}

TEST(Backward, MaskedColumnGetsZeroGradient) {
    std::mt19937_64 rng(1);
    Tape tape;
    const Var x = tape.input(gradcheck::random_tensor(rng, 3, 5));
    const Var m = tape.mask(x, {1, 1, 0, 1, 0});
    tape.backward(tape.weighted_sum(m, gradcheck::random_tensor(rng, 3, 5)));
    const Tensor2 g = tape.grad(x);
    for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_EQ(g(c, 2), 0.0);
        EXPECT_EQ(g(c, 4), 0.0);
        EXPECT_NE(g(c, 0), 0.0);
    }
}

TEST(Backward, AccumulatesAcrossCalls) {
    ParamTensor w(Tensor2(1, 1, 0.3));
    ParamTensor b(Tensor2(1, 1, 0.0));
    for (int rep = 0; rep < 2; ++rep) {
        Tape tape;
        tape.backward(tape.pointwise(tape.input(Tensor2(1, 1, 2.0)), w, b));
    }
    EXPECT_DOUBLE_EQ(w.grad(0, 0), 4.0);
    EXPECT_DOUBLE_EQ(b.grad(0, 0), 2.0);
}

TEST(Backward, ConstParamsReceiveNoGradient) {
    const ParamTensor w(Tensor2(1, 1, 0.3));
    const ParamTensor b(Tensor2(1, 1, 0.0));
    Tape tape;
    const Var x = tape.input(Tensor2(1, 1, 2.0));
    tape.backward(tape.pointwise(x, w, b));
    EXPECT_EQ(w.grad(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(tape.grad(x)(0, 0), 0.3);
}

TEST(Backward, UsageErrors) {
    Tape empty;
    EXPECT_THROW(empty.backward(Var{0}), UsageError);
    Tape tape;
    const Var x = tape.input(Tensor2(2, 2));
    EXPECT_THROW(tape.backward(x), UsageError);
    EXPECT_THROW(tape.backward(Var{7}), UsageError);
}

TEST(GradientCheck, EveryOpAgreesWithFiniteDifferences) {
    std::mt19937_64 rng(2024);
    for (int draw = 0; draw < 10; ++draw) {
        for (const auto& r : gradcheck::check_all_ops(rng)) {
            EXPECT_LE(r.max_rel_error, gradcheck::kOpTolerance) << r.name << " draw " << draw;
        }
    }
}

TEST(GradientCheck, EndToEndLoss) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        EXPECT_LE(gradcheck::check_end_to_end(seed), gradcheck::kEndToEndTolerance) << "seed " << seed;
    }
}

TEST(Adam, ZeroGradientLeavesParameters) {
    ParamTensor p(Tensor2(2, 2, 0.7));
    std::vector<ParamTensor*> ps{&p};
    AdamState st(AdamOptions{}, ps);
    adam_step(ps, st);
    EXPECT_EQ(p.value, Tensor2(2, 2, 0.7));
    EXPECT_EQ(st.step_count, 1u);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    // m_hat = g and v_hat = g^2 after bias correction, so the step is
    // -lr * g / (|g| + eps).
    ParamTensor p(Tensor2(1, 1, 0.0));
    p.grad(0, 0) = 1.0;
    std::vector<ParamTensor*> ps{&p};
    AdamState st(AdamOptions{.lr = 5e-4}, ps);
    adam_step(ps, st);
    EXPECT_NEAR(p.value(0, 0), -5e-4 / (1.0 + 1e-8), 1e-18);
    EXPECT_EQ(p.grad(0, 0), 1.0);
}

TEST(Adam, Deterministic) {
    auto run = [] {
        std::mt19937_64 rng(11);
        ParamTensor p(gradcheck::random_tensor(rng, 3, 4));
        std::vector<ParamTensor*> ps{&p};
        AdamState st(AdamOptions{}, ps);
        for (int s = 0; s < 5; ++s) {
            p.grad = gradcheck::random_tensor(rng, 3, 4);
            adam_step(ps, st);
        }
        return p.value;
    };
    EXPECT_EQ(run(), run());
}

TEST(Adam, RejectsMismatchedState) {
    ParamTensor a(Tensor2(1, 1));
    ParamTensor b(Tensor2(1, 1));
    std::vector<ParamTensor*> one{&a};
    std::vector<ParamTensor*> two{&a, &b};
    AdamState st(AdamOptions{}, one);
    EXPECT_THROW(adam_step(two, st), ConfigError);
}
