#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "lrlab/datagen.hpp"
#include "lrlab/gradients.hpp"
#include "lrlab/model.hpp"
#include "lrlab/rng.hpp"

namespace lrlab {

struct TrainConfig {
    double eta = 0.1;
    std::size_t batch_size = 50;
    std::size_t iters = 50;
    std::vector<std::size_t> snapshot_at = {0, 1, 10, 20, 30, 50};
    std::size_t eval_every = 10;
    std::size_t train_size = 500;
    std::size_t test_size = 500;
    std::uint64_t seed = 1;

    // Checks the fields against a training set of n examples.
    void validate(std::size_t n) const;
};

struct MetricsRecord {
    std::size_t iter = 0;
    double train_hinge = 0.0;
    double test_hinge = 0.0;
    double zero_one = 0.0;
    double attn_relevant = 0.0;

    bool operator==(const MetricsRecord&) const = default;
};

struct TrainTrajectory {
    Params initial;
    std::vector<std::pair<std::size_t, Params>> snapshots;  // ascending iteration
    std::vector<MetricsRecord> metrics_log;
    std::size_t iters = 0;

    // nullptr when no snapshot was taken at that iteration
    const Params* snapshot(std::size_t iter) const;
};

// Draws batches without replacement within an epoch; the index order is
// reshuffled at the start of every epoch. A short tail is dropped.
class BatchSampler {
public:
    BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed);

    std::vector<std::size_t> next();

private:
    std::vector<std::size_t> order_;
    std::size_t batch_size_;
    std::size_t pos_;
    Rng rng_;
};

// W <- W - eta * mean_n grad_W loss_n for W in {W_Q, W_K, W_V, W_O}; A untouched.
Params sgd_step(const Params& params, std::span<const Example* const> batch, double eta);

// round(c_t * eta^(-3/5) / alpha_star)
std::size_t suggested_iters(double eta, double alpha_star, double c_t = 1.0);

TrainTrajectory train(const TrainConfig& tc, const Dataset& dataset, const Dataset& testset, const ModelConfig& mc);

}  // namespace lrlab
