#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "lrlab/datagen.hpp"
#include "lrlab/linalg.hpp"

namespace lrlab {

struct Dims {
    std::size_t d = 20;
    std::size_t L = 10;
    std::size_t M = 20;
    std::size_t m = 200;    // hidden neurons (rows of W_O)
    std::size_t m_a = 20;   // value width
    std::size_t m_b = 20;   // query/key width

    bool operator==(const Dims&) const = default;
};

struct ModelConfig {
    std::size_t m = 200;
    std::size_t m_a = 20;
    std::size_t m_b = 20;
    double delta = 0.1;  // diagonal of W_Q, W_K, W_V at initialization
    double xi = 0.1;     // std of W_O entries at initialization
    // When set, every column a_(l) of the output layer is the same draw, so each
    // neuron has a single output sign.
    bool tied_a = false;
    std::uint64_t seed = 1;

    void validate() const;
};

Dims make_dims(const DataConfig& data, const ModelConfig& model);

// Trainable set {W_Q, W_K, W_V, W_O} plus the frozen output layer A.
struct Params {
    Matrix w_q;  // m_b x d
    Matrix w_k;  // m_b x d
    Matrix w_v;  // m_a x d
    Matrix w_o;  // m x m_a
    Matrix a;    // m x L, column l is a_(l)
    Dims dims;

    bool operator==(const Params&) const = default;
};

Params init_params(const ModelConfig& mc, const Dims& dims);

// softmax over keys of X^T W_K^T W_Q x_l, max-subtracted.
Vector attention_weights(const Params& params, const Matrix& x, std::size_t l);

// Everything the backward pass needs from one forward evaluation.
struct ForwardTrace {
    Matrix keys;      // W_K X, m_b x L
    Matrix queries;   // W_Q X, m_b x L
    Matrix values;    // W_V X, m_a x L
    Matrix attn;      // L x |S|, column k is the softmax for query s_set[k]
    Matrix mixed;     // m_a x |S|, W_V X softmax(...)
    Matrix preact;    // m x |S|, W_O * mixed
    double output = 0.0;
};

ForwardTrace forward_trace(const Params& params, const Example& example);
double forward(const Params& params, const Example& example);

double hinge_loss(double f_value, int y) noexcept;

// Mean hinge loss over the dataset. Throws for an empty dataset.
double empirical_risk(const Params& params, const Dataset& dataset);

struct Metrics {
    double hinge = 0.0;
    double zero_one_error = 0.0;
    double attn_on_relevant = 0.0;
};

// Hinge (population-risk estimate), sign error with F = 0 counted wrong, and
// the attention mass placed on label-relevant tokens averaged over queries and examples.
Metrics evaluate(const Params& params, const Dataset& testset);

// Binary weight snapshot; layout in docs/formats.md.
void save_params(const Params& params, const std::filesystem::path& path);
Params load_params(const std::filesystem::path& path);

}  // namespace lrlab
