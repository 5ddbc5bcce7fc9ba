#include "lrlab/experiment.hpp"

#include <array>
#include <cstdio>

#include "lrlab/artifacts.hpp"
#include "lrlab/io.hpp"
#include "lrlab/pruning.hpp"

namespace lrlab {

namespace {

constexpr std::array<std::pair<std::string_view, Subcommand>, 6> kNames = {{
    {"train", Subcommand::train},
    {"rank-sweep", Subcommand::rank_sweep},
    {"spectra", Subcommand::spectra},
    {"prune-sweep", Subcommand::prune_sweep},
    {"grad-check", Subcommand::grad_check},
    {"all", Subcommand::all},
}};

class Emitter {
public:
    explicit Emitter(std::filesystem::path root) : result_{std::move(root), {}} {}

    void write(const std::filesystem::path& rel, std::string_view content) {
        io::write_atomic(result_.output_dir / rel, content);
        result_.written.push_back(rel);
    }

    void note(const std::filesystem::path& rel) { result_.written.push_back(rel); }

    const std::filesystem::path& root() const { return result_.output_dir; }
    RunResult take() { return std::move(result_); }

private:
    RunResult result_;
};

void stage_train(Workspace& ws, Emitter& out) {
    const ExperimentConfig& cfg = ws.config();
    const TrainTrajectory& traj = ws.trajectory();
    char seed_tag[32];
    std::snprintf(seed_tag, sizeof seed_tag, "-s%llu", static_cast<unsigned long long>(cfg.seed));
    const std::filesystem::path run = std::filesystem::path("runs") / (config_hash(cfg) + seed_tag);
    save_dataset(ws.trainset(), out.root() / run / "train.bin");
    out.note(run / "train.bin");
    save_dataset(ws.testset(), out.root() / run / "test.bin");
    out.note(run / "test.bin");
    for (const auto& [iter, params] : traj.snapshots) {
        const auto name = run / ("snapshot_" + std::to_string(iter) + ".bin");
        save_params(params, out.root() / name);
        out.note(name);
    }
    out.write("metrics.csv", artifacts::metrics_csv(traj.metrics_log));
}

void stage_spectra(Workspace& ws, Emitter& out) {
    const TrainTrajectory& traj = ws.trajectory();
    out.write("spectra.csv", artifacts::spectra_csv(traj));
    out.write("projections.csv", artifacts::projections_csv(delta(traj, traj.iters), ws.patterns()));
    out.write("theorem_report.json",
              artifacts::theorem_report_json(theorem_check(traj, ws.patterns(), ws.config().thresholds)));
    out.write("plotdata/fig2.csv", artifacts::fig2_csv(traj));
}

void stage_rank_sweep(Workspace& ws, Emitter& out) {
    const auto sweep = rank_sweep(ws.trajectory(), ws.config().ranks, ws.testset());
    out.write("rank_sweep.csv", artifacts::rank_sweep_csv(sweep));
    out.write("plotdata/fig1a.csv", artifacts::fig1a_csv(sweep));
    out.write("plotdata/fig1b.csv", artifacts::fig1b_csv(sweep));
}

void stage_prune_sweep(Workspace& ws, Emitter& out) {
    const TrainTrajectory& traj = ws.trajectory();
    const Params& last = *traj.snapshot(traj.iters);
    auto sweep = prune_sweep(last, ws.config().prune_rates, PruneOrder::smallest_first, ws.testset());
    const auto largest = prune_sweep(last, ws.config().prune_rates, PruneOrder::largest_first, ws.testset());
    sweep.insert(sweep.end(), largest.begin(), largest.end());
    out.write("prune_sweep.csv", artifacts::prune_sweep_csv(sweep));
    out.write("plotdata/fig3a.csv", artifacts::fig3a_csv(neuron_stats(last.w_o, last.a, ws.patterns())));
    out.write("plotdata/fig3b.csv", artifacts::fig3b_csv(sweep));
}

void stage_grad_check(Workspace& ws, Emitter& out) {
    const ExperimentConfig& cfg = ws.config();
    const GradCheckReport rep = check_gradients(cfg.gradcheck_trials, cfg.gradcheck_seed(), cfg.gradcheck_eps);
    out.write("grad_report.json", artifacts::grad_report_json(rep, cfg.gradcheck_eps, cfg.gradcheck_seed()));
}

}  // namespace

std::optional<Subcommand> parse_subcommand(std::string_view name) {
    for (const auto& [text, cmd] : kNames) {
        if (text == name) {
            return cmd;
        }
    }
    return std::nullopt;
}

const char* to_string(Subcommand cmd) noexcept {
    for (const auto& [text, c] : kNames) {
        if (c == cmd) {
            return text.data();
        }
    }
    return "?";
}

Workspace::Workspace(ExperimentConfig config) : config_(std::move(config)) { config_.validate(); }

const PatternSet& Workspace::patterns() {
    if (!patterns_) {
        patterns_ = gen_patterns(config_.data);
    }
    return *patterns_;
}

const Dataset& Workspace::trainset() {
    if (!trainset_) {
        trainset_ = gen_dataset(config_.train.train_size, patterns(), config_.data, config_.dataset_seed());
    }
    return *trainset_;
}

const Dataset& Workspace::testset() {
    if (!testset_) {
        testset_ = gen_dataset(config_.train.test_size, patterns(), config_.data, config_.testset_seed());
    }
    return *testset_;
}

const TrainTrajectory& Workspace::trajectory() {
    if (!trajectory_) {
        TrainConfig tc = config_.train;
        // analysis always needs the endpoints
        tc.snapshot_at.push_back(0);
        tc.snapshot_at.push_back(tc.iters);
        trajectory_ = train(tc, trainset(), testset(), config_.model);
    }
    return *trajectory_;
}

std::string config_hash(const ExperimentConfig& config) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : render_config(config)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

RunResult run_experiment(const ExperimentConfig& config, Subcommand cmd) {
    Workspace ws(config);
    Emitter out(config.output_dir);
    out.write("resolved.cfg", render_config(ws.config()));
    const bool all = cmd == Subcommand::all;
    if (all || cmd == Subcommand::grad_check) {
        stage_grad_check(ws, out);
    }
    if (all || cmd == Subcommand::train) {
        stage_train(ws, out);
    }
    if (all || cmd == Subcommand::spectra) {
        stage_spectra(ws, out);
    }
    if (all || cmd == Subcommand::rank_sweep) {
        stage_rank_sweep(ws, out);
    }
    if (all || cmd == Subcommand::prune_sweep) {
        stage_prune_sweep(ws, out);
    }
    return out.take();
}

}  // namespace lrlab
