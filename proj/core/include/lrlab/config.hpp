#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrlab/analysis.hpp"
#include "lrlab/datagen.hpp"
#include "lrlab/model.hpp"
#include "lrlab/trainer.hpp"

namespace lrlab {

// Every scalar of an experiment. Per-stream seeds (patterns, training set,
// test set, initialization, batch order, gradient check) are derived from `seed`.
struct ExperimentConfig {
    std::uint64_t seed = 1;
    DataConfig data;
    ModelConfig model;
    TrainConfig train;
    double c_t = 1.0;
    TheoremThresholds thresholds;
    std::vector<std::size_t> ranks = {1, 2, 5, 10, 20};
    std::vector<double> prune_rates = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::size_t gradcheck_trials = 20;
    double gradcheck_eps = 1e-6;
    std::filesystem::path output_dir = "out";

    // Re-derives all stream seeds from `seed`.
    void apply_seed(std::uint64_t new_seed);

    std::uint64_t dataset_seed() const;
    std::uint64_t testset_seed() const;
    std::uint64_t gradcheck_seed() const;

    // Cross-field checks; throws ErrorKind::validation naming the offending key.
    void validate() const;
};

// Parses "key = value" lines; '#' starts a comment. Unknown or repeated keys and
// malformed values raise ErrorKind::validation naming the key. Missing keys keep
// their defaults; train.snapshot_at defaults to {0, 1, 10, 20, 30, iters}.
ExperimentConfig parse_config(std::string_view text);

// Throws ErrorKind::not_found when the file does not exist.
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text form with every key resolved. parse_config(render_config(c))
// reproduces c except output_dir, which is a run location rather than a parameter.
std::string render_config(const ExperimentConfig& config);

}  // namespace lrlab
