#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "lrlab/errors.hpp"
#include "lrlab/io.hpp"
#include "lrlab/model.hpp"
#include "support.hpp"

using namespace lrlab;
using lrlab::test::bare_example;
using lrlab::test::random_matrix;
using lrlab::test::random_params;
using lrlab::test::zero_params;

namespace {

Dataset single(const Example& ex) { return test::dataset_of({ex}); }

}  // namespace

TEST(InitParams, DiagonalAndOutputLayer) {
    ModelConfig mc;
    const Dims dims{20, 10, 20, 200, 20, 20};
    const Params p = init_params(mc, dims);
    EXPECT_EQ(p.w_q(0, 0), 0.1);
    EXPECT_EQ(p.w_q(0, 1), 0.0);
    EXPECT_EQ(p.w_k(5, 5), 0.1);
    EXPECT_EQ(p.w_v(19, 19), 0.1);
    const double amp = 1.0 / std::sqrt(200.0);
    for (double v : p.a.data()) {
        EXPECT_EQ(std::abs(v), amp);
    }
}

TEST(InitParams, OutputWeightStatistics) {
    ModelConfig mc;
    mc.seed = 123;
    const Params p = init_params(mc, Dims{20, 10, 20, 200, 20, 20});
    const auto w = p.w_o.data();
    const double n = static_cast<double>(w.size());
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
    double var = 0.0;
    for (double v : w) {
        var += (v - mean) * (v - mean);
    }
    const double sd = std::sqrt(var / (n - 1.0));
    EXPECT_LE(std::abs(mean), 3.0 * 0.1 / std::sqrt(200.0 * 20.0));
    EXPECT_NEAR(sd, 0.1, 0.005);
}

TEST(InitParams, TiedColumnsShareSigns) {
    ModelConfig mc;
    mc.tied_a = true;
    const Params p = init_params(mc, Dims{20, 10, 20, 50, 20, 20});
    for (std::size_t i = 0; i < 50; ++i) {
        for (std::size_t l = 1; l < 10; ++l) {
            EXPECT_EQ(p.a(i, l), p.a(i, 0));
        }
    }
}

TEST(InitParams, RejectsBadConfig) {
    ModelConfig mc;
    mc.delta = 0.0;
    EXPECT_THROW(init_params(mc, Dims{}), Error);
    mc = ModelConfig{};
    mc.xi = -1.0;
    EXPECT_THROW(init_params(mc, Dims{}), Error);
}

TEST(Attention, ZeroKeysGiveUniformWeights) {
    const Dims dims{4, 5, 4, 3, 4, 4};
    Params p = random_params(dims, 1, false);
    p.w_k = Matrix(4, 4);
    const Vector w = attention_weights(p, random_matrix(4, 5, 9), 2);
    for (double v : w) {
        EXPECT_NEAR(v, 0.2, 1e-15);
    }
}

TEST(Attention, SingleTokenIsOne) {
    const Dims dims{3, 1, 3, 2, 3, 3};
    const Vector w = attention_weights(random_params(dims, 2, false), random_matrix(3, 1, 3), 0);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0], 1.0);
}

TEST(Attention, ClosedFormSoftmax) {
    // X = I, query row e_1, key row (log 1, log 2, log 3): logits are log(1, 2, 3)
    const Dims dims{3, 3, 3, 1, 3, 1};
    Params p = zero_params(dims);
    p.w_q(0, 0) = 1.0;
    p.w_k(0, 0) = std::log(1.0);
    p.w_k(0, 1) = std::log(2.0);
    p.w_k(0, 2) = std::log(3.0);
    const Vector w = attention_weights(p, Matrix::identity(3), 0);
    EXPECT_NEAR(w[0], 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(w[1], 2.0 / 6.0, 1e-15);
    EXPECT_NEAR(w[2], 3.0 / 6.0, 1e-15);
}

TEST(Attention, AlwaysADistribution) {
    const Dims dims{6, 7, 6, 3, 5, 4};
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        Params p = random_params(dims, seed * 10, false);
        p.w_q *= 1.0 + static_cast<double>(seed);  // up to very peaked logits
        const Matrix x = random_matrix(6, 7, seed + 1000, 3.0);
        for (std::size_t l = 0; l < 7; ++l) {
            const Vector w = attention_weights(p, x, l);
            double total = 0.0;
            for (double v : w) {
                ASSERT_GE(v, 0.0);
                ASSERT_TRUE(std::isfinite(v));
                total += v;
            }
            ASSERT_NEAR(total, 1.0, 1e-12);
        }
    }
}

TEST(Forward, ZeroOutputWeightsGiveZero) {
    const Dims dims{4, 3, 4, 5, 4, 4};
    Params p = random_params(dims, 4, false);
    p.w_o = Matrix(5, 4);
    Example ex = bare_example(4, 3, 1);
    ex.x = random_matrix(4, 3, 5);
    EXPECT_EQ(forward(p, ex), 0.0);
}

TEST(Forward, HandComputedSingleToken) {
    const Dims dims{2, 1, 2, 2, 2, 2};
    Params p = zero_params(dims);
    p.w_v = Matrix::identity(2);
    p.w_o = Matrix{{1.0, 0.0}, {-1.0, 0.0}};
    p.a(0, 0) = 1.0 / std::sqrt(2.0);
    p.a(1, 0) = -1.0 / std::sqrt(2.0);
    Example ex = bare_example(2, 1, 1);
    ex.x(0, 0) = 1.0;
    EXPECT_NEAR(forward(p, ex), 1.0 / std::sqrt(2.0), 1e-15);
}

TEST(Forward, UniformAttentionReducesToMlpOfMeanValue) {
    const Dims dims{5, 4, 5, 7, 3, 2};
    Params p = random_params(dims, 7, true);
    p.w_k = Matrix(2, 5);
    Example ex = bare_example(5, 4, 1);
    ex.x = random_matrix(5, 4, 8);

    Vector mean(5, 0.0);
    for (std::size_t l = 0; l < 4; ++l) {
        for (std::size_t i = 0; i < 5; ++i) {
            mean[i] += ex.x(i, l) / 4.0;
        }
    }
    const Vector h = matvec(p.w_o, matvec(p.w_v, mean));
    double expected = 0.0;
    for (std::size_t i = 0; i < 7; ++i) {
        expected += p.a(i, 0) * std::max(h[i], 0.0);
    }
    EXPECT_NEAR(forward(p, ex), expected, 1e-12);

    const ForwardTrace t = forward_trace(p, ex);
    for (std::size_t k = 1; k < 4; ++k) {
        for (std::size_t i = 0; i < 7; ++i) {
            EXPECT_NEAR(t.preact(i, k), t.preact(i, 0), 1e-12);
        }
    }
}

TEST(Forward, PermutationInvariantWithTiedOutputLayer) {
    const Dims dims{6, 5, 6, 8, 6, 6};
    const Params p = random_params(dims, 21, true);
    Example ex = bare_example(6, 5, 1);
    ex.x = random_matrix(6, 5, 22);
    const double base = forward(p, ex);
    std::vector<std::size_t> perm = {3, 0, 4, 1, 2};
    Example shuffled = ex;
    for (std::size_t l = 0; l < 5; ++l) {
        shuffled.x.set_col(l, ex.x.col(perm[l]));
    }
    EXPECT_NEAR(forward(p, shuffled), base, 1e-12);
}

TEST(Forward, ShapeMismatchThrows) {
    const Dims dims{4, 3, 4, 5, 4, 4};
    const Params p = random_params(dims, 1, false);
    EXPECT_THROW(forward(p, bare_example(4, 2, 1)), Error);
}

TEST(Hinge, Values) {
    EXPECT_EQ(hinge_loss(2.0, 1), 0.0);
    EXPECT_EQ(hinge_loss(0.0, 1), 1.0);
    EXPECT_EQ(hinge_loss(-1.0, 1), 2.0);
    EXPECT_EQ(hinge_loss(1.0, 1), 0.0);
    EXPECT_EQ(hinge_loss(-1.0, -1), 0.0);
    for (double f = -3.0; f <= 3.0; f += 0.125) {
        for (int y : {-1, 1}) {
            EXPECT_EQ(hinge_loss(f, y) == 0.0, y * f >= 1.0);
        }
    }
}

TEST(EmpiricalRisk, SmallCases) {
    const Dims dims{2, 1, 2, 2, 2, 2};
    Params p = zero_params(dims);
    p.w_v = Matrix::identity(2);
    p.w_o = Matrix{{4.0, 0.0}, {0.0, 4.0}};
    p.a(0, 0) = 1.0;
    p.a(1, 0) = -1.0;
    Example pos = bare_example(2, 1, 1);
    pos.x(0, 0) = 1.0;  // F = 4
    Example neg = bare_example(2, 1, -1);
    neg.x(1, 0) = 1.0;  // F = -4
    Dataset ds = test::dataset_of({pos, neg});
    EXPECT_EQ(empirical_risk(p, ds), 0.0);
    EXPECT_EQ(empirical_risk(p, single(pos)), hinge_loss(forward(p, pos), 1));

    Example zero = bare_example(2, 1, 1);  // F = 0, loss 1
    ds.examples = {pos, zero};
    EXPECT_EQ(empirical_risk(p, ds), 0.5);
    EXPECT_THROW(empirical_risk(p, test::dataset_of({})), Error);
}

TEST(Evaluate, PerfectClassifierAndZeroCountsAsWrong) {
    const Dims dims{2, 1, 2, 2, 2, 2};
    Params p = zero_params(dims);
    p.w_v = Matrix::identity(2);
    p.w_o = Matrix{{4.0, 0.0}, {0.0, 4.0}};
    p.a(0, 0) = 1.0;
    p.a(1, 0) = -1.0;
    Example pos = bare_example(2, 1, 1);
    pos.x(0, 0) = 1.0;
    Example neg = bare_example(2, 1, -1);
    neg.x(1, 0) = 1.0;
    Dataset ds = test::dataset_of({pos, neg});
    Metrics m = evaluate(p, ds);
    EXPECT_EQ(m.hinge, 0.0);
    EXPECT_EQ(m.zero_one_error, 0.0);
    ds.examples = {pos, bare_example(2, 1, 1)};
    EXPECT_EQ(evaluate(p, ds).zero_one_error, 0.5);
}

TEST(Evaluate, UniformAttentionMassEqualsRelevantFraction) {
    DataConfig dc;
    const PatternSet ps = gen_patterns(dc);
    const Dataset ds = gen_dataset(20, ps, dc, 3);
    ModelConfig mc;
    Params p = init_params(mc, make_dims(dc, mc));
    p.w_k = Matrix(20, 20);
    EXPECT_NEAR(evaluate(p, ds).attn_on_relevant, 0.4, 1e-12);
}

TEST(Params, SnapshotRoundTrip) {
    ModelConfig mc;
    mc.seed = 5;
    const Params p = init_params(mc, Dims{20, 10, 20, 30, 20, 20});
    test::TempDir dir("model");
    save_params(p, dir.path() / "p.bin");
    EXPECT_EQ(load_params(dir.path() / "p.bin"), p);
    EXPECT_THROW(load_params(dir.path() / "missing.bin"), Error);
    io::write_atomic(dir.path() / "short.bin", io::read_file(dir.path() / "p.bin").substr(0, 100));
    EXPECT_THROW(load_params(dir.path() / "short.bin"), Error);
}
