#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrlab/analysis.hpp"
#include "lrlab/config.hpp"
#include "lrlab/datagen.hpp"
#include "lrlab/trainer.hpp"

namespace lrlab {

enum class Subcommand { train, rank_sweep, spectra, prune_sweep, grad_check, all };

// Accepts the command-line spellings: train, rank-sweep, spectra, prune-sweep, grad-check, all.
std::optional<Subcommand> parse_subcommand(std::string_view name);
const char* to_string(Subcommand cmd) noexcept;

// Lazily built inputs shared by the pipeline stages of one configuration.
class Workspace {
public:
    explicit Workspace(ExperimentConfig config);

    const ExperimentConfig& config() const noexcept { return config_; }
    const PatternSet& patterns();
    const Dataset& trainset();
    const Dataset& testset();
    const TrainTrajectory& trajectory();

private:
    ExperimentConfig config_;
    std::optional<PatternSet> patterns_;
    std::optional<Dataset> trainset_;
    std::optional<Dataset> testset_;
    std::optional<TrainTrajectory> trajectory_;
};

// 16 hex digits of FNV-1a over the resolved config text.
std::string config_hash(const ExperimentConfig& config);

struct RunResult {
    std::filesystem::path output_dir;
    std::vector<std::filesystem::path> written;  // relative to output_dir, in write order
};

// Runs one subcommand ('all' runs every stage) and writes its artifacts into
// config.output_dir. Every file is written atomically. Errors propagate as lrlab::Error.
RunResult run_experiment(const ExperimentConfig& config, Subcommand cmd);

}  // namespace lrlab
