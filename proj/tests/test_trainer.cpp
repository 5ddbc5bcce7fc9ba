#include <cmath>

#include <gtest/gtest.h>

#include "lrlab/errors.hpp"
#include "lrlab/trainer.hpp"
#include "support.hpp"

using namespace lrlab;

namespace {

struct Toy {
    DataConfig dc;
    ModelConfig mc;
    PatternSet ps;
    Dataset train;
    Dataset test;

    Toy() : ps(gen_patterns(dc)), train(gen_dataset(60, ps, dc, 11)), test(gen_dataset(40, ps, dc, 12)) {
        mc.m = 24;
        mc.seed = 3;
    }
};

TrainConfig small_config() {
    TrainConfig tc;
    tc.eta = 1.0;
    tc.batch_size = 20;
    tc.iters = 7;
    tc.snapshot_at = {0, 3, 7};
    tc.eval_every = 2;
    tc.seed = 5;
    return tc;
}

}  // namespace

TEST(SgdStep, ZeroStepLeavesParamsBitwise) {
    Toy s;
    const Params p = init_params(s.mc, make_dims(s.dc, s.mc));
    std::vector<const Example*> batch = {&s.train.examples[0], &s.train.examples[1]};
    EXPECT_EQ(sgd_step(p, batch, 0.0), p);
}

TEST(SgdStep, InactiveBatchLeavesParams) {
    const Dims dims{2, 1, 2, 2, 2, 2};
    Params p = test::zero_params(dims);
    p.w_v = Matrix::identity(2);
    p.w_o = Matrix{{4.0, 0.0}, {0.0, 4.0}};
    p.a(0, 0) = 1.0;
    p.a(1, 0) = -1.0;
    Example pos = test::bare_example(2, 1, 1);
    pos.x(0, 0) = 1.0;
    Example neg = test::bare_example(2, 1, -1);
    neg.x(1, 0) = 1.0;
    std::vector<const Example*> batch = {&pos, &neg};
    EXPECT_EQ(sgd_step(p, batch, 0.5), p);
}

TEST(SgdStep, SingleExampleMatchesBackward) {
    Toy s;
    const Params p = init_params(s.mc, make_dims(s.dc, s.mc));
    const Example& ex = s.train.examples[3];
    const Params next = sgd_step(p, std::vector<const Example*>{&ex}, 0.7);
    const GradSet g = backward(p, ex);
    EXPECT_LE(max_abs_diff(next.w_q, p.w_q - 0.7 * g.g_q), 1e-15);
    EXPECT_LE(max_abs_diff(next.w_k, p.w_k - 0.7 * g.g_k), 1e-15);
    EXPECT_LE(max_abs_diff(next.w_v, p.w_v - 0.7 * g.g_v), 1e-15);
    EXPECT_LE(max_abs_diff(next.w_o, p.w_o - 0.7 * g.g_o), 1e-15);
    EXPECT_EQ(next.a, p.a);
}

TEST(SuggestedIters, Formula) {
    EXPECT_EQ(suggested_iters(1.0, 1.0, 1.0), 1u);
    EXPECT_EQ(suggested_iters(0.1, 0.4, 1.0), 10u);
    EXPECT_EQ(suggested_iters(0.1, 0.4, 2.0), 20u);
    EXPECT_THROW(suggested_iters(0.0, 0.4), Error);
}

TEST(BatchSampler, EpochsCoverEveryIndexOnce) {
    BatchSampler sampler(10, 5, 1);
    for (int epoch = 0; epoch < 3; ++epoch) {
        std::vector<int> seen(10, 0);
        for (int b = 0; b < 2; ++b) {
            for (std::size_t i : sampler.next()) {
                ++seen[i];
            }
        }
        for (int c : seen) {
            EXPECT_EQ(c, 1);
        }
    }
    EXPECT_THROW(BatchSampler(4, 5, 1), Error);
}

TEST(Train, SingleStepTwoSnapshots) {
    Toy s;
    TrainConfig tc = small_config();
    tc.iters = 1;
    tc.snapshot_at = {0, 1};
    const TrainTrajectory traj = train(tc, s.train, s.test, s.mc);
    ASSERT_EQ(traj.snapshots.size(), 2u);
    EXPECT_EQ(traj.snapshots[0].first, 0u);
    EXPECT_EQ(traj.snapshots[0].second, traj.initial);
    EXPECT_EQ(traj.snapshots[1].first, 1u);
}

TEST(Train, FrozenOutputLayerAndInitialRisk) {
    Toy s;
    const TrainTrajectory traj = train(small_config(), s.train, s.test, s.mc);
    for (const auto& [iter, p] : traj.snapshots) {
        EXPECT_EQ(p.a, traj.initial.a) << iter;
    }
    ASSERT_FALSE(traj.metrics_log.empty());
    EXPECT_EQ(traj.metrics_log.front().iter, 0u);
    EXPECT_EQ(traj.metrics_log.front().train_hinge, empirical_risk(traj.initial, s.train));
    std::vector<std::size_t> iters;
    for (const auto& r : traj.metrics_log) {
        iters.push_back(r.iter);
    }
    EXPECT_EQ(iters, (std::vector<std::size_t>{0, 2, 4, 6, 7}));
}

TEST(Train, ZeroStepKeepsInitialization) {
    Toy s;
    TrainConfig tc = small_config();
    tc.eta = 0.0;
    const TrainTrajectory traj = train(tc, s.train, s.test, s.mc);
    for (const auto& [iter, p] : traj.snapshots) {
        EXPECT_EQ(p, traj.initial) << iter;
    }
}

TEST(Train, Deterministic) {
    Toy s;
    const TrainTrajectory a = train(small_config(), s.train, s.test, s.mc);
    const TrainTrajectory b = train(small_config(), s.train, s.test, s.mc);
    EXPECT_EQ(a.metrics_log, b.metrics_log);
    ASSERT_EQ(a.snapshots.size(), b.snapshots.size());
    for (std::size_t k = 0; k < a.snapshots.size(); ++k) {
        EXPECT_EQ(a.snapshots[k].second, b.snapshots[k].second);
    }
}

TEST(Train, FinalMinusInitialEqualsSummedUpdates) {
    Toy s;
    const TrainConfig tc = small_config();
    const TrainTrajectory traj = train(tc, s.train, s.test, s.mc);

    // replay the same batch stream and accumulate the raw updates
    BatchSampler sampler(s.train.size(), tc.batch_size, tc.seed);
    Params p = traj.initial;
    GradSet total = GradSet::zeros_like(p);
    for (std::size_t t = 0; t < tc.iters; ++t) {
        std::vector<const Example*> batch;
        for (std::size_t i : sampler.next()) {
            batch.push_back(&s.train.examples[i]);
        }
        GradSet g = batch_gradient(p, batch);
        g *= tc.eta;
        total += g;
        p = sgd_step(p, batch, tc.eta);
    }
    const Params& last = *traj.snapshot(tc.iters);
    EXPECT_LE(max_abs_diff(last.w_q - traj.initial.w_q, -1.0 * total.g_q), 1e-10);
    EXPECT_LE(max_abs_diff(last.w_k - traj.initial.w_k, -1.0 * total.g_k), 1e-10);
    EXPECT_LE(max_abs_diff(last.w_v - traj.initial.w_v, -1.0 * total.g_v), 1e-10);
    EXPECT_LE(max_abs_diff(last.w_o - traj.initial.w_o, -1.0 * total.g_o), 1e-10);
}

TEST(Train, RejectsBadConfig) {
    Toy s;
    TrainConfig tc = small_config();
    tc.batch_size = 61;
    EXPECT_THROW(train(tc, s.train, s.test, s.mc), Error);
    tc = small_config();
    tc.snapshot_at = {8};
    EXPECT_THROW(train(tc, s.train, s.test, s.mc), Error);
    tc = small_config();
    tc.iters = 0;
    EXPECT_THROW(train(tc, s.train, s.test, s.mc), Error);
}

TEST(Train, ReferenceScaleConverges) {
    DataConfig dc;
    ModelConfig mc;
    mc.tied_a = true;
    const PatternSet ps = gen_patterns(dc);
    const Dataset tr = gen_dataset(500, ps, dc, 21);
    const Dataset te = gen_dataset(500, ps, dc, 22);
    TrainConfig tc;
    tc.eta = 1.0;
    tc.seed = 23;
    const TrainTrajectory traj = train(tc, tr, te, mc);
    EXPECT_LE(traj.metrics_log.back().test_hinge, 0.1);
    EXPECT_LT(traj.metrics_log.back().test_hinge, traj.metrics_log.front().test_hinge);
}
