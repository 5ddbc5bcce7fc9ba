#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "lrlab/linalg.hpp"
#include "lrlab/rng.hpp"

namespace lrlab {

enum class NoiseMode {
    gaussian,  // token = mu_j + N(0, sigma^2 I), not renormalized
    bounded,   // token within tau of mu_j, renormalized to unit norm
};

struct DataConfig {
    std::size_t d = 20;
    std::size_t L = 10;
    std::size_t M = 20;
    double sigma = 0.1;
    double tau = 0.05;
    NoiseMode noise_mode = NoiseMode::gaussian;
    std::size_t n_relevant = 4;
    std::size_t n_confusion = 2;
    std::uint64_t seed = 1;

    double alpha_star() const noexcept { return static_cast<double>(n_relevant) / static_cast<double>(L); }
    double alpha_sharp() const noexcept { return static_cast<double>(n_confusion) / static_cast<double>(L); }

    // Throws ErrorKind::invalid_argument describing the first violated invariant.
    void validate() const;
};

// M x d matrix; row j is pattern mu_{j+1}. Rows 0 and 1 are the discriminative pair.
struct PatternSet {
    Matrix patterns;

    std::size_t count() const noexcept { return patterns.rows(); }
    std::size_t dim() const noexcept { return patterns.cols(); }
    std::span<const double> operator[](std::size_t j) const noexcept { return patterns.row(j); }
};

enum class TokenRole : std::uint8_t { label_relevant = 0, confusion = 1, irrelevant = 2 };

struct TokenTag {
    std::uint32_t pattern = 0;  // zero-based pattern index
    TokenRole role = TokenRole::irrelevant;

    bool operator==(const TokenTag&) const = default;
};

struct Example {
    Matrix x;                          // d x L, column l is token l
    int y = 1;                         // +1 or -1
    std::vector<TokenTag> provenance;  // one per token
    std::vector<std::size_t> s_set;    // token indices averaged in the output

    std::size_t count(TokenRole role) const;
};

struct Dataset {
    std::vector<Example> examples;
    DataConfig config;
    PatternSet patterns;

    std::size_t size() const noexcept { return examples.size(); }
    std::size_t positives() const;
    std::size_t negatives() const { return size() - positives(); }
};

PatternSet gen_patterns(const DataConfig& config);

// Holds the random stream and the round-robin cursor over irrelevant patterns.
class ExampleSampler {
public:
    ExampleSampler(const PatternSet& patterns, const DataConfig& config, std::uint64_t seed);

    Vector sample_token(std::size_t pattern_index);
    Example sample_example(int label);

private:
    PatternSet patterns_;
    DataConfig config_;
    Rng rng_;
    std::size_t irrelevant_cursor_ = 0;
};

// Majority vote over nearest patterns. Throws ErrorKind::degenerate on a tie
// between the mu_1 and mu_2 counts.
int label_of(const Matrix& x, const PatternSet& patterns);

// Index of the pattern nearest (Euclidean) to the given token.
std::size_t nearest_pattern(std::span<const double> token, const PatternSet& patterns);

// n examples with labels alternating +1, -1, ...
Dataset gen_dataset(std::size_t n, const PatternSet& patterns, const DataConfig& config, std::uint64_t seed);

// Binary snapshot, little-endian. Layout is documented in docs/formats.md.
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace lrlab
