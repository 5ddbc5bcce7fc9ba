// lrlab <subcommand> --config <path> [--out <dir>] [--seed <int>]
//
// Exit codes: 0 success, 1 validation or usage error, 2 runtime failure.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lrlab/config.hpp"
#include "lrlab/errors.hpp"
#include "lrlab/experiment.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
};

int run(lrlab::Subcommand cmd, const Options& opt) {
    lrlab::ExperimentConfig cfg;
    try {
        cfg = lrlab::load_config(opt.config);
        if (opt.seed) {
            cfg.apply_seed(*opt.seed);
        }
        if (!opt.out.empty()) {
            cfg.output_dir = opt.out;
        }
        cfg.validate();
    } catch (const lrlab::Error& e) {
        std::cerr << "lrlab: " << e.what() << '\n';
        return e.kind() == lrlab::ErrorKind::validation || e.kind() == lrlab::ErrorKind::not_found ? kValidation
                                                                                                    : kRuntime;
    }

    try {
        const auto result = lrlab::run_experiment(cfg, cmd);
        std::cout << lrlab::to_string(cmd) << ": wrote " << result.written.size() << " files to "
                  << result.output_dir.string() << '\n';
        return kOk;
    } catch (const lrlab::Error& e) {
        std::cerr << "lrlab: " << e.what() << '\n';
        return e.kind() == lrlab::ErrorKind::validation ? kValidation : kRuntime;
    } catch (const std::exception& e) {
        std::cerr << "lrlab: " << e.what() << '\n';
        return kRuntime;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Train the one-layer attention model on synthetic pattern data and analyze its weight updates"};
    app.require_subcommand(1);

    Options opt;
    std::optional<lrlab::Subcommand> chosen;
    for (const char* name : {"train", "rank-sweep", "spectra", "prune-sweep", "grad-check", "all"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", opt.config, "experiment config file")->required();
        sub->add_option("--out", opt.out, "output directory (overrides output_dir)");
        sub->add_option("--seed", opt.seed, "master seed (overrides seed)");
        sub->callback([&chosen, name] { chosen = lrlab::parse_subcommand(name); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }
    return run(*chosen, opt);
}
