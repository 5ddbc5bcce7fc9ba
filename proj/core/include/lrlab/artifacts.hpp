#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lrlab/analysis.hpp"
#include "lrlab/gradients.hpp"
#include "lrlab/pruning.hpp"
#include "lrlab/trainer.hpp"

// Text renderers for every emitted artifact. Column headers are fixed; indices
// in CSVs are 1-based; reals use the shortest round-trip decimal form.
namespace lrlab::artifacts {

// iter,train_hinge,test_hinge,zero_one,attn_relevant
std::string metrics_csv(std::span<const MetricsRecord> log);

// iter,matrix,index,sigma for every snapshot and every trainable matrix
std::string spectra_csv(const TrainTrajectory& trajectory);

// matrix,i,j,value for the final Delta W_Q, Delta W_K, Delta W_V
std::string projections_csv(const DeltaWeights& dw, const PatternSet& patterns);

// rank,hinge,zero_one,attn_relevant
std::string rank_sweep_csv(std::span<const RankMetrics> sweep);

// order,rate,hinge,zero_one
std::string prune_sweep_csv(std::span<const PruneMetrics> sweep);

std::string theorem_report_json(const TheoremReport& report);

inline constexpr double kGradTolerance = 1e-5;
std::string grad_report_json(const GradCheckReport& report, double eps, std::uint64_t seed);

// Plot data, one file per figure panel.
std::string fig1a_csv(std::span<const RankMetrics> sweep);   // rank,test_hinge
std::string fig1b_csv(std::span<const RankMetrics> sweep);   // rank,attn_relevant
std::string fig2_csv(const TrainTrajectory& trajectory);     // iter,index,sigma of Delta W_K, t > 0
std::string fig3a_csv(const NeuronStats& stats);             // position,neuron,norm,class
std::string fig3b_csv(std::span<const PruneMetrics> sweep);  // rate,test_hinge,zero_one (smallest_first rows)

}  // namespace lrlab::artifacts
