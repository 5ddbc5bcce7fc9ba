#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <unistd.h>

#include "lrlab/datagen.hpp"
#include "lrlab/linalg.hpp"
#include "lrlab/model.hpp"
#include "lrlab/rng.hpp"

namespace lrlab::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, double scale = 1.0) {
    Rng rng(seed);
    Matrix a(rows, cols);
    for (double& v : a.data()) {
        v = scale * rng.normal();
    }
    return a;
}

// Dense random weights; output columns share one sign per neuron when tied.
inline Params random_params(const Dims& dims, std::uint64_t seed, bool tied) {
    Params p{random_matrix(dims.m_b, dims.d, seed, 0.8),     random_matrix(dims.m_b, dims.d, seed + 1, 0.8),
             random_matrix(dims.m_a, dims.d, seed + 2, 0.8), random_matrix(dims.m, dims.m_a, seed + 3),
             Matrix(dims.m, dims.L),                         dims};
    Rng rng(seed + 4);
    for (std::size_t i = 0; i < dims.m; ++i) {
        const double s = rng.coin() ? 1.0 : -1.0;
        for (std::size_t l = 0; l < dims.L; ++l) {
            p.a(i, l) = tied ? s : (rng.coin() ? 1.0 : -1.0);
        }
    }
    return p;
}

// Zero-padded example of L tokens with S = [L] and the given label.
inline Example bare_example(std::size_t d, std::size_t L, int y) {
    Example ex{Matrix(d, L), y, std::vector<TokenTag>(L), {}};
    for (std::size_t l = 0; l < L; ++l) {
        ex.s_set.push_back(l);
    }
    return ex;
}

// Dataset wrapper for hand-built examples; config and patterns are placeholders.
inline Dataset dataset_of(std::vector<Example> examples) {
    return Dataset{std::move(examples), DataConfig{}, PatternSet{Matrix(1, 1)}};
}

inline Params zero_params(const Dims& dims) {
    return Params{Matrix(dims.m_b, dims.d), Matrix(dims.m_b, dims.d), Matrix(dims.m_a, dims.d),
                  Matrix(dims.m, dims.m_a),  Matrix(dims.m, dims.L),  dims};
}

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("lrlab-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace lrlab::test
