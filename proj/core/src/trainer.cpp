#include "lrlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lrlab/errors.hpp"

namespace lrlab {

namespace {

constexpr std::string_view kModule = "trainer";

[[noreturn]] void fail(const std::string& what) {
    throw Error(ErrorKind::invalid_argument, kModule, what);
}

MetricsRecord record(std::size_t iter, const Params& p, const Dataset& dataset, const Dataset& testset) {
    const Metrics test = evaluate(p, testset);
    return MetricsRecord{iter, empirical_risk(p, dataset), test.hinge, test.zero_one_error, test.attn_on_relevant};
}

}  // namespace

void TrainConfig::validate(std::size_t n) const {
    if (!(eta >= 0.0) || !std::isfinite(eta)) {
        fail("eta must be finite and >= 0");
    }
    if (batch_size < 1 || batch_size > n) {
        fail("batch_size must lie in [1, N] (N=" + std::to_string(n) + ")");
    }
    if (iters < 1) {
        fail("iters must be >= 1");
    }
    if (eval_every < 1) {
        fail("eval_every must be >= 1");
    }
    for (std::size_t s : snapshot_at) {
        if (s > iters) {
            fail("snapshot iteration " + std::to_string(s) + " exceeds iters");
        }
    }
}

const Params* TrainTrajectory::snapshot(std::size_t iter) const {
    for (const auto& [it, p] : snapshots) {
        if (it == iter) {
            return &p;
        }
    }
    return nullptr;
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : order_(n), batch_size_(batch_size), pos_(n), rng_(seed) {
    if (batch_size == 0 || batch_size > n) {
        fail("batch size must lie in [1, N]");
    }
    std::iota(order_.begin(), order_.end(), std::size_t{0});
}

std::vector<std::size_t> BatchSampler::next() {
    if (pos_ + batch_size_ > order_.size()) {
        rng_.shuffle(std::span<std::size_t>(order_));
        pos_ = 0;
    }
    std::vector<std::size_t> batch(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                   order_.begin() + static_cast<std::ptrdiff_t>(pos_ + batch_size_));
    pos_ += batch_size_;
    return batch;
}

Params sgd_step(const Params& params, std::span<const Example* const> batch, double eta) {
    if (batch.empty()) {
        fail("sgd_step needs a non-empty batch");
    }
    const GradSet g = batch_gradient(params, batch);
    Params next = params;
    next.w_q.axpy(-eta, g.g_q);
    next.w_k.axpy(-eta, g.g_k);
    next.w_v.axpy(-eta, g.g_v);
    next.w_o.axpy(-eta, g.g_o);
    return next;
}

std::size_t suggested_iters(double eta, double alpha_star, double c_t) {
    if (!(eta > 0.0) || !(alpha_star > 0.0) || !(c_t > 0.0)) {
        fail("suggested_iters needs positive eta, alpha_star and c_t");
    }
    return static_cast<std::size_t>(std::llround(c_t * std::pow(eta, -0.6) / alpha_star));
}

TrainTrajectory train(const TrainConfig& tc, const Dataset& dataset, const Dataset& testset, const ModelConfig& mc) {
    if (dataset.examples.empty() || testset.examples.empty()) {
        fail("training and test sets must be non-empty");
    }
    tc.validate(dataset.size());
    std::vector<std::size_t> snaps = tc.snapshot_at;
    std::sort(snaps.begin(), snaps.end());
    snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

    Params params = init_params(mc, make_dims(dataset.config, mc));
    TrainTrajectory traj{params, {}, {}, tc.iters};

    auto after_step = [&](std::size_t t) {
        if (std::binary_search(snaps.begin(), snaps.end(), t)) {
            traj.snapshots.emplace_back(t, params);
        }
        if (t % tc.eval_every == 0 || t == tc.iters) {
            traj.metrics_log.push_back(record(t, params, dataset, testset));
        }
    };

    after_step(0);
    BatchSampler sampler(dataset.size(), tc.batch_size, tc.seed);
    std::vector<const Example*> batch(tc.batch_size);
    for (std::size_t t = 1; t <= tc.iters; ++t) {
        const auto idx = sampler.next();
        for (std::size_t b = 0; b < idx.size(); ++b) {
            batch[b] = &dataset.examples[idx[b]];
        }
        params = sgd_step(params, batch, tc.eta);
        after_step(t);
    }
    return traj;
}

}  // namespace lrlab
