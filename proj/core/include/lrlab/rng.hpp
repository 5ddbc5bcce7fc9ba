#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace lrlab {

// Seeded random source. The engine is std::mt19937_64, whose output sequence is
// fixed by the standard; the distributions are implemented here rather than taken
// from <random> because those are implementation-defined, and artifacts must be
// byte-identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform();

    // Uniform integer on [0, n); n must be positive.
    std::size_t index(std::size_t n);

    // Standard normal (Marsaglia polar method, spare value cached).
    double normal();

    bool coin() { return (engine_() >> 63) != 0; }

    // Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Derives an independent stream seed from a base seed and a stream tag (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace lrlab
