#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "lrlab/datagen.hpp"
#include "lrlab/linalg.hpp"
#include "lrlab/model.hpp"
#include "lrlab/trainer.hpp"

namespace lrlab {

// W^(t) - W^(0) for each trainable matrix.
struct DeltaWeights {
    Matrix d_q;
    Matrix d_k;
    Matrix d_v;
    Matrix d_o;
};

// Throws ErrorKind::not_found when no snapshot exists at at_iter.
DeltaWeights delta(const TrainTrajectory& trajectory, std::size_t at_iter);

Vector spectrum(const Matrix& dw);

// P(i, j) = mu_i^T dw mu_j, zero-based. dw must be d x d.
struct ProjectionTable {
    Matrix p;
};

ProjectionTable projection_table(const Matrix& dw, const PatternSet& patterns);

// Share of squared projection mass in the rows of mu_1 and mu_2; 0 for an all-zero table.
double discriminative_energy_ratio(const ProjectionTable& table);

struct RankMetrics {
    std::size_t rank = 0;
    Metrics metrics;
};

// Evaluates W^(0) + truncate_rank(W^(T) - W^(0), r) for every trainable matrix.
std::vector<RankMetrics> rank_sweep(const TrainTrajectory& trajectory, std::span<const std::size_t> ranks,
                                    const Dataset& testset);

// Two-class split of a set of values maximizing between-class variance (Otsu).
// Returns the number of values in the low class; the whole set is "low" when
// the values have no spread.
struct TwoClassSplit {
    std::size_t low_count = 0;
    double threshold = 0.0;  // midpoint between the classes
};
TwoClassSplit otsu_split(std::span<const double> values);

struct NeuronStats {
    Vector norms;            // row norms of W_O in original row order
    Vector sorted_norms;     // ascending
    double small_fraction = 0.0;
    double threshold = 0.0;
    std::vector<bool> large; // per row: above the split
    Vector alignment;        // |o_i . mu_target| / max(|o_i|, 1e-12)
};

// Target pattern of neuron i is mu_1 when a(i, 0) > 0 and mu_2 otherwise.
NeuronStats neuron_stats(const Matrix& w_o, const Matrix& a, const PatternSet& patterns);

// Mean alignment of the selected rows of w to their target pattern.
double mean_alignment(const Matrix& w, const Matrix& a, const PatternSet& patterns, const std::vector<bool>& select);

struct TheoremThresholds {
    double dominance_factor = 3.0;
    double energy_min = 0.85;
    double spectral_ratio_max = 0.1;
    double small_min = 0.3;
    double small_max = 0.5;
    double align_min = 0.7;
};

struct MatrixReport {
    std::string name;
    double p11 = 0.0;
    double p22 = 0.0;
    double max_off_target = 0.0;  // max |P_ij| over rows i outside {mu_1, mu_2}
    double energy_ratio = 0.0;
    double sigma2_over_sigma1 = 0.0;
    double sigma3_over_sigma2 = 0.0;
    Vector singular_values;
    bool dominance_pass = false;
    bool energy_pass = false;
    bool spectral_pass = false;

    bool pass() const noexcept { return dominance_pass && energy_pass && spectral_pass; }
};

struct NeuronReport {
    double small_fraction = 0.0;
    double threshold = 0.0;
    std::vector<std::size_t> histogram;  // counts of W_O^(T) row norms
    double histogram_min = 0.0;
    double histogram_max = 0.0;
    double mean_alignment_weights = 0.0;  // rows of W_O^(T) above the split
    double mean_alignment_delta = 0.0;    // rows of Delta W_O, same neurons
    bool small_pass = false;
    bool align_weights_pass = false;
    bool align_delta_pass = false;

    bool pass() const noexcept { return small_pass && align_weights_pass && align_delta_pass; }
};

struct TheoremReport {
    TheoremThresholds thresholds;
    std::size_t at_iter = 0;
    std::array<MatrixReport, 3> matrices;  // Delta W_Q, Delta W_K, Delta W_V
    NeuronReport neurons;
    std::vector<std::string> notes;

    bool pass() const noexcept;
};

inline constexpr std::size_t kNormHistogramBins = 20;

// Evaluates the projection-dominance, energy, spectral and neuron checks on
// W^(T) - W^(0). Failures are reported, not thrown. Requires m_a = m_b = d.
TheoremReport theorem_check(const TrainTrajectory& trajectory, const PatternSet& patterns,
                            const TheoremThresholds& thresholds);

}  // namespace lrlab
