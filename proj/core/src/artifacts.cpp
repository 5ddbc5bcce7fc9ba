#include "lrlab/artifacts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "lrlab/io.hpp"

namespace lrlab::artifacts {

namespace {

using nlohmann::ordered_json;

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json json_real(double v) {
    // non-finite ratios (zero denominators) become null
    return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr);
}

}  // namespace

std::string metrics_csv(std::span<const MetricsRecord> log) {
    io::CsvWriter csv{"iter", "train_hinge", "test_hinge", "zero_one", "attn_relevant"};
    for (const MetricsRecord& r : log) {
        csv.cell(r.iter).cell(r.train_hinge).cell(r.test_hinge).cell(r.zero_one).cell(r.attn_relevant);
        csv.end_row();
    }
    return csv.str();
}

std::string spectra_csv(const TrainTrajectory& trajectory) {
    io::CsvWriter csv{"iter", "matrix", "index", "sigma"};
    for (const auto& [iter, params] : trajectory.snapshots) {
        const DeltaWeights dw = delta(trajectory, iter);
        const std::array<const Matrix*, 4> mats = {&dw.d_q, &dw.d_k, &dw.d_v, &dw.d_o};
        for (std::size_t k = 0; k < mats.size(); ++k) {
            const Vector s = spectrum(*mats[k]);
            for (std::size_t i = 0; i < s.size(); ++i) {
                csv.cell(iter).cell(kTrainableNames[k]).cell(i + 1).cell(s[i]);
                csv.end_row();
            }
        }
    }
    return csv.str();
}

std::string projections_csv(const DeltaWeights& dw, const PatternSet& patterns) {
    io::CsvWriter csv{"matrix", "i", "j", "value"};
    const std::array<const Matrix*, 3> mats = {&dw.d_q, &dw.d_k, &dw.d_v};
    for (std::size_t k = 0; k < mats.size(); ++k) {
        const Matrix p = projection_table(*mats[k], patterns).p;
        for (std::size_t i = 0; i < p.rows(); ++i) {
            for (std::size_t j = 0; j < p.cols(); ++j) {
                csv.cell(kTrainableNames[k]).cell(i + 1).cell(j + 1).cell(p(i, j));
                csv.end_row();
            }
        }
    }
    return csv.str();
}

std::string rank_sweep_csv(std::span<const RankMetrics> sweep) {
    io::CsvWriter csv{"rank", "hinge", "zero_one", "attn_relevant"};
    for (const RankMetrics& r : sweep) {
        csv.cell(r.rank).cell(r.metrics.hinge).cell(r.metrics.zero_one_error).cell(r.metrics.attn_on_relevant);
        csv.end_row();
    }
    return csv.str();
}

std::string prune_sweep_csv(std::span<const PruneMetrics> sweep) {
    io::CsvWriter csv{"order", "rate", "hinge", "zero_one"};
    for (const PruneMetrics& r : sweep) {
        csv.cell(to_string(r.order)).cell(r.rate).cell(r.metrics.hinge).cell(r.metrics.zero_one_error);
        csv.end_row();
    }
    return csv.str();
}

std::string theorem_report_json(const TheoremReport& report) {
    const TheoremThresholds& th = report.thresholds;
    ordered_json j;
    j["at_iter"] = report.at_iter;
    j["thresholds"] = {{"dominance_factor", th.dominance_factor}, {"energy_min", th.energy_min},
                       {"spectral_ratio_max", th.spectral_ratio_max}, {"small_min", th.small_min},
                       {"small_max", th.small_max}, {"align_min", th.align_min}};
    ordered_json mats = ordered_json::array();
    for (const MatrixReport& m : report.matrices) {
        mats.push_back({{"matrix", m.name},
                        {"p11", m.p11},
                        {"p22", m.p22},
                        {"max_off_target", m.max_off_target},
                        {"energy_ratio", m.energy_ratio},
                        {"sigma2_over_sigma1", json_real(m.sigma2_over_sigma1)},
                        {"sigma3_over_sigma2", json_real(m.sigma3_over_sigma2)},
                        {"singular_values", m.singular_values},
                        {"dominance_pass", m.dominance_pass},
                        {"energy_pass", m.energy_pass},
                        {"spectral_pass", m.spectral_pass},
                        {"pass", m.pass()}});
    }
    j["matrices"] = std::move(mats);
    const NeuronReport& n = report.neurons;
    j["neurons"] = {{"small_fraction", n.small_fraction},
                    {"threshold", n.threshold},
                    {"histogram", n.histogram},
                    {"histogram_min", n.histogram_min},
                    {"histogram_max", n.histogram_max},
                    {"mean_alignment_weights", n.mean_alignment_weights},
                    {"mean_alignment_delta", n.mean_alignment_delta},
                    {"small_pass", n.small_pass},
                    {"align_weights_pass", n.align_weights_pass},
                    {"align_delta_pass", n.align_delta_pass},
                    {"pass", n.pass()}};
    j["notes"] = report.notes;
    j["pass"] = report.pass();
    return dump(j);
}

std::string grad_report_json(const GradCheckReport& report, double eps, std::uint64_t seed) {
    ordered_json per = ordered_json::object();
    for (std::size_t k = 0; k < kTrainableNames.size(); ++k) {
        per[kTrainableNames[k]] = report.per_matrix[k];
    }
    ordered_json j;
    j["trials"] = report.trials;
    j["resamples"] = report.resamples;
    j["eps"] = eps;
    j["seed"] = seed;
    j["tolerance"] = kGradTolerance;
    j["max_rel_error"] = report.max_rel_error;
    j["per_matrix"] = std::move(per);
    j["pass"] = report.max_rel_error <= kGradTolerance;
    return dump(j);
}

std::string fig1a_csv(std::span<const RankMetrics> sweep) {
    io::CsvWriter csv{"rank", "test_hinge"};
    for (const RankMetrics& r : sweep) {
        csv.cell(r.rank).cell(r.metrics.hinge);
        csv.end_row();
    }
    return csv.str();
}

std::string fig1b_csv(std::span<const RankMetrics> sweep) {
    io::CsvWriter csv{"rank", "attn_relevant"};
    for (const RankMetrics& r : sweep) {
        csv.cell(r.rank).cell(r.metrics.attn_on_relevant);
        csv.end_row();
    }
    return csv.str();
}

std::string fig2_csv(const TrainTrajectory& trajectory) {
    io::CsvWriter csv{"iter", "index", "sigma"};
    for (const auto& [iter, params] : trajectory.snapshots) {
        if (iter == 0) {
            continue;
        }
        const Vector s = spectrum(delta(trajectory, iter).d_k);
        for (std::size_t i = 0; i < s.size(); ++i) {
            csv.cell(iter).cell(i + 1).cell(s[i]);
            csv.end_row();
        }
    }
    return csv.str();
}

std::string fig3a_csv(const NeuronStats& stats) {
    std::vector<std::size_t> order(stats.norms.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return stats.norms[a] < stats.norms[b]; });
    io::CsvWriter csv{"position", "neuron", "norm", "class"};
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        csv.cell(k + 1).cell(i + 1).cell(stats.norms[i]).cell(stats.large[i] ? "large" : "small");
        csv.end_row();
    }
    return csv.str();
}

std::string fig3b_csv(std::span<const PruneMetrics> sweep) {
    io::CsvWriter csv{"rate", "test_hinge", "zero_one"};
    for (const PruneMetrics& r : sweep) {
        if (r.order != PruneOrder::smallest_first) {
            continue;
        }
        csv.cell(r.rate).cell(r.metrics.hinge).cell(r.metrics.zero_one_error);
        csv.end_row();
    }
    return csv.str();
}

}  // namespace lrlab::artifacts
