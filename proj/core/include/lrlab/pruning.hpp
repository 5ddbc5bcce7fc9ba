#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lrlab/datagen.hpp"
#include "lrlab/model.hpp"

namespace lrlab {

enum class PruneOrder { smallest_first, largest_first };

struct PruneSpec {
    double rate = 0.0;  // fraction of W_O rows to zero, in [0, 1]
    PruneOrder order = PruneOrder::smallest_first;
};

// Row indices of W_O in pruning order: by Euclidean norm (ascending for
// smallest_first, descending for largest_first), ties broken by lower index.
std::vector<std::size_t> prune_order(const Matrix& w_o, PruneOrder order);

// Number of rows removed at a rate: floor(rate * m), tolerant of rounding in rate.
std::size_t pruned_count(double rate, std::size_t m);

// Zeroes the first floor(rate * m) rows of W_O in the chosen order. Rows that are
// already zero count toward that number, so prune(prune(p, s), s) == prune(p, s).
Params prune(const Params& params, const PruneSpec& spec);

struct PruneMetrics {
    PruneOrder order = PruneOrder::smallest_first;
    double rate = 0.0;
    Metrics metrics;
};

// rates must be ascending
std::vector<PruneMetrics> prune_sweep(const Params& params, std::span<const double> rates, PruneOrder order,
                                      const Dataset& testset);

const char* to_string(PruneOrder order) noexcept;

}  // namespace lrlab
