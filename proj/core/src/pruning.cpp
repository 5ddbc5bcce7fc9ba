#include "lrlab/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lrlab/errors.hpp"

namespace lrlab {

namespace {

constexpr std::string_view kModule = "pruning";

}  // namespace

const char* to_string(PruneOrder order) noexcept {
    return order == PruneOrder::smallest_first ? "smallest_first" : "largest_first";
}

std::vector<std::size_t> prune_order(const Matrix& w_o, PruneOrder order) {
    const Vector norms = row_norms(w_o);
    std::vector<std::size_t> idx(norms.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (order == PruneOrder::smallest_first) {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return norms[a] < norms[b]; });
    } else {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });
    }
    return idx;
}

std::size_t pruned_count(double rate, std::size_t m) {
    const double raw = rate * static_cast<double>(m);
    return std::min(m, static_cast<std::size_t>(std::floor(raw + 1e-9)));
}

Params prune(const Params& params, const PruneSpec& spec) {
    if (!(spec.rate >= 0.0 && spec.rate <= 1.0)) {
        throw Error(ErrorKind::invalid_argument, kModule, "pruning rate must lie in [0, 1]");
    }
    Params out = params;
    const std::size_t k = pruned_count(spec.rate, params.w_o.rows());
    if (k == 0) {
        return out;
    }
    // rows that are already zero count as pruned, which keeps prune idempotent
    // for largest_first as well
    std::size_t already = 0;
    for (std::size_t i = 0; i < params.w_o.rows(); ++i) {
        const auto row = params.w_o.row(i);
        already += std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; }) ? 1 : 0;
    }
    const auto idx = prune_order(params.w_o, spec.order);
    for (std::size_t n = 0, zeroed = already; n < idx.size() && zeroed < k; ++n) {
        auto row = out.w_o.row(idx[n]);
        if (std::all_of(row.begin(), row.end(), [](double v) { return v == 0.0; })) {
            continue;
        }
        std::fill(row.begin(), row.end(), 0.0);
        ++zeroed;
    }
    return out;
}

std::vector<PruneMetrics> prune_sweep(const Params& params, std::span<const double> rates, PruneOrder order,
                                      const Dataset& testset) {
    if (!std::is_sorted(rates.begin(), rates.end())) {
        throw Error(ErrorKind::invalid_argument, kModule, "pruning rates must be ascending");
    }
    std::vector<PruneMetrics> out;
    out.reserve(rates.size());
    for (double r : rates) {
        out.push_back(PruneMetrics{order, r, evaluate(prune(params, PruneSpec{r, order}), testset)});
    }
    return out;
}

}  // namespace lrlab
