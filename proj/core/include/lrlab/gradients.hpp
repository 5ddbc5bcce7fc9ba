#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>

#include "lrlab/model.hpp"

namespace lrlab {

// Gradients of the four trainable matrices. The output layer A is frozen and has no entry.
struct GradSet {
    Matrix g_q;
    Matrix g_k;
    Matrix g_v;
    Matrix g_o;

    static GradSet zeros_like(const Params& p);

    GradSet& operator+=(const GradSet& rhs);
    GradSet& operator*=(double s);
};

inline constexpr std::array<const char*, 4> kTrainableNames = {"W_Q", "W_K", "W_V", "W_O"};

// Subgradient of max{1 - yF, 0}. Zero when the hinge is inactive (yF >= 1);
// Relu uses subgradient 0 at 0.
GradSet backward(const Params& params, const Example& example);

// Mean of per-example gradients, summed in the given order.
GradSet batch_gradient(const Params& params, std::span<const Example* const> batch);

using LossFn = std::function<double(const Params&)>;

// Central differences of an arbitrary loss over the trainable matrices.
GradSet finite_diff_grad(const Params& params, const LossFn& loss, double eps);

// Central differences of the hinge loss on one example. Every perturbed
// evaluation must keep the hinge state and all Relu signs of the base point;
// otherwise ErrorKind::degenerate is thrown and the caller should re-sample.
GradSet finite_diff_grad(const Params& params, const Example& example, double eps = 1e-6);

// ||g_analytic - g_fd||_F / max(||g_fd||_F, 1e-12)
double relative_error(const Matrix& analytic, const Matrix& numeric);

struct GradCheckReport {
    double max_rel_error = 0.0;
    std::array<double, 4> per_matrix{};  // worst relative error for W_Q, W_K, W_V, W_O
    std::size_t trials = 0;
    std::size_t resamples = 0;  // instances discarded for kink proximity
};

// Compares backward against finite_diff_grad on seeded random small instances
// (d = 4, L = 3, m = 6, m_a = m_b = 4).
GradCheckReport check_gradients(std::size_t trials, std::uint64_t seed, double eps = 1e-6);

}  // namespace lrlab
