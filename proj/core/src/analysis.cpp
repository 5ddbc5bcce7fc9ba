#include "lrlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lrlab/errors.hpp"

namespace lrlab {

namespace {

constexpr std::string_view kModule = "analysis";

const Params& final_params(const TrainTrajectory& traj) {
    const Params* last = traj.snapshot(traj.iters);
    if (last == nullptr) {
        throw Error(ErrorKind::not_found, kModule, "no snapshot at the final iteration " + std::to_string(traj.iters));
    }
    return *last;
}

MatrixReport matrix_report(std::string name, const Matrix& dw, const PatternSet& patterns,
                           const TheoremThresholds& th) {
    MatrixReport r;
    r.name = std::move(name);
    const ProjectionTable table = projection_table(dw, patterns);
    const Matrix& p = table.p;
    r.p11 = p(0, 0);
    r.p22 = p(1, 1);
    for (std::size_t i = 2; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
            r.max_off_target = std::max(r.max_off_target, std::abs(p(i, j)));
        }
    }
    r.energy_ratio = discriminative_energy_ratio(table);
    r.singular_values = spectrum(dw);
    const auto& s = r.singular_values;
    auto ratio = [](double num, double den) { return den > 0.0 ? num / den : (num > 0.0 ? INFINITY : 0.0); };
    r.sigma2_over_sigma1 = s.size() > 1 ? ratio(s[1], s[0]) : 0.0;
    r.sigma3_over_sigma2 = s.size() > 2 ? ratio(s[2], s[1]) : 0.0;

    r.dominance_pass = std::min(r.p11, r.p22) > th.dominance_factor * r.max_off_target;
    r.energy_pass = r.energy_ratio >= th.energy_min;
    r.spectral_pass = r.sigma3_over_sigma2 <= th.spectral_ratio_max;
    return r;
}

}  // namespace

DeltaWeights delta(const TrainTrajectory& trajectory, std::size_t at_iter) {
    const Params* at = trajectory.snapshot(at_iter);
    if (at == nullptr) {
        throw Error(ErrorKind::not_found, kModule, "no snapshot at iteration " + std::to_string(at_iter));
    }
    const Params& init = trajectory.initial;
    return DeltaWeights{at->w_q - init.w_q, at->w_k - init.w_k, at->w_v - init.w_v, at->w_o - init.w_o};
}

Vector spectrum(const Matrix& dw) { return svd(dw).s; }

ProjectionTable projection_table(const Matrix& dw, const PatternSet& patterns) {
    if (dw.rows() != patterns.dim() || dw.cols() != patterns.dim()) {
        throw Error(ErrorKind::shape, kModule,
                    "projection table needs a " + std::to_string(patterns.dim()) + "x" +
                        std::to_string(patterns.dim()) + " update, got " + std::to_string(dw.rows()) + "x" +
                        std::to_string(dw.cols()));
    }
    const Matrix& mu = patterns.patterns;
    return ProjectionTable{matmul_nt(matmul(mu, dw), mu)};
}

double discriminative_energy_ratio(const ProjectionTable& table) {
    const Matrix& p = table.p;
    double top = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
            const double e = p(i, j) * p(i, j);
            total += e;
            if (i < 2) {
                top += e;
            }
        }
    }
    return total > 0.0 ? top / total : 0.0;
}

std::vector<RankMetrics> rank_sweep(const TrainTrajectory& trajectory, std::span<const std::size_t> ranks,
                                    const Dataset& testset) {
    const Params& last = final_params(trajectory);
    const Params& init = trajectory.initial;
    const SvdResult fq = svd(last.w_q - init.w_q);
    const SvdResult fk = svd(last.w_k - init.w_k);
    const SvdResult fv = svd(last.w_v - init.w_v);
    const SvdResult fo = svd(last.w_o - init.w_o);

    std::vector<RankMetrics> out;
    out.reserve(ranks.size());
    for (std::size_t r : ranks) {
        if (r == 0) {
            throw Error(ErrorKind::invalid_argument, kModule, "rank sweep needs ranks >= 1");
        }
        Params approx = init;
        approx.w_q += truncate_rank(fq, r);
        approx.w_k += truncate_rank(fk, r);
        approx.w_v += truncate_rank(fv, r);
        approx.w_o += truncate_rank(fo, r);
        out.push_back(RankMetrics{r, evaluate(approx, testset)});
    }
    return out;
}

TwoClassSplit otsu_split(std::span<const double> values) {
    Vector v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n == 0) {
        return {};
    }
    if (n == 1 || v.back() - v.front() <= 1e-12 * std::max(1.0, std::abs(v.back()))) {
        return TwoClassSplit{n, v.back()};
    }
    Vector prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        prefix[i + 1] = prefix[i] + v[i];
    }
    double best = -1.0;
    std::size_t best_k = 1;
    for (std::size_t k = 1; k < n; ++k) {
        if (v[k] == v[k - 1]) {
            continue;  // split must fall between distinct values
        }
        const double w0 = static_cast<double>(k) / static_cast<double>(n);
        const double w1 = 1.0 - w0;
        const double m0 = prefix[k] / static_cast<double>(k);
        const double m1 = (prefix[n] - prefix[k]) / static_cast<double>(n - k);
        const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
        if (between > best) {
            best = between;
            best_k = k;
        }
    }
    return TwoClassSplit{best_k, 0.5 * (v[best_k - 1] + v[best_k])};
}

namespace {

std::span<const double> target_pattern(const Matrix& a, const PatternSet& patterns, std::size_t i) {
    return a(i, 0) > 0.0 ? patterns[0] : patterns[1];
}

}  // namespace

NeuronStats neuron_stats(const Matrix& w_o, const Matrix& a, const PatternSet& patterns) {
    if (w_o.rows() != a.rows()) {
        throw Error(ErrorKind::shape, kModule, "W_O and A disagree on the neuron count");
    }
    if (w_o.cols() != patterns.dim()) {
        throw Error(ErrorKind::shape, kModule, "W_O rows must live in the pattern dimension");
    }
    NeuronStats st;
    st.norms = row_norms(w_o);
    st.sorted_norms = st.norms;
    std::sort(st.sorted_norms.begin(), st.sorted_norms.end());
    const TwoClassSplit split = otsu_split(st.norms);
    st.small_fraction = static_cast<double>(split.low_count) / static_cast<double>(st.norms.size());
    st.threshold = split.threshold;
    st.large.resize(st.norms.size());
    st.alignment.resize(st.norms.size());
    for (std::size_t i = 0; i < st.norms.size(); ++i) {
        st.large[i] = split.low_count < st.norms.size() && st.norms[i] > split.threshold;
        st.alignment[i] = std::abs(dot(w_o.row(i), target_pattern(a, patterns, i))) / std::max(st.norms[i], 1e-12);
    }
    return st;
}

double mean_alignment(const Matrix& w, const Matrix& a, const PatternSet& patterns, const std::vector<bool>& select) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < w.rows(); ++i) {
        if (!select[i]) {
            continue;
        }
        const double nrm = norm2(w.row(i));
        total += std::abs(dot(w.row(i), target_pattern(a, patterns, i))) / std::max(nrm, 1e-12);
        ++count;
    }
    return count > 0 ? total / static_cast<double>(count) : 0.0;
}

bool TheoremReport::pass() const noexcept {
    return std::all_of(matrices.begin(), matrices.end(), [](const MatrixReport& m) { return m.pass(); }) &&
           neurons.pass();
}

TheoremReport theorem_check(const TrainTrajectory& trajectory, const PatternSet& patterns,
                            const TheoremThresholds& thresholds) {
    const Params& last = final_params(trajectory);
    const Dims& dm = last.dims;
    if (dm.m_a != dm.d || dm.m_b != dm.d) {
        throw Error(ErrorKind::shape, kModule, "theorem check requires m_a = m_b = d");
    }
    const DeltaWeights dw = delta(trajectory, trajectory.iters);

    TheoremReport rep;
    rep.thresholds = thresholds;
    rep.at_iter = trajectory.iters;
    rep.matrices = {matrix_report("W_Q", dw.d_q, patterns, thresholds),
                    matrix_report("W_K", dw.d_k, patterns, thresholds),
                    matrix_report("W_V", dw.d_v, patterns, thresholds)};

    const NeuronStats st = neuron_stats(last.w_o, last.a, patterns);
    NeuronReport& nr = rep.neurons;
    nr.small_fraction = st.small_fraction;
    nr.threshold = st.threshold;
    nr.histogram_min = st.sorted_norms.front();
    nr.histogram_max = st.sorted_norms.back();
    nr.histogram.assign(kNormHistogramBins, 0);
    const double width = (nr.histogram_max - nr.histogram_min) / static_cast<double>(kNormHistogramBins);
    for (double v : st.norms) {
        std::size_t bin = width > 0.0 ? static_cast<std::size_t>((v - nr.histogram_min) / width) : 0;
        nr.histogram[std::min(bin, kNormHistogramBins - 1)] += 1;
    }
    nr.mean_alignment_weights = mean_alignment(last.w_o, last.a, patterns, st.large);
    nr.mean_alignment_delta = mean_alignment(dw.d_o, last.a, patterns, st.large);
    nr.small_pass = nr.small_fraction >= thresholds.small_min && nr.small_fraction <= thresholds.small_max;
    nr.align_weights_pass = nr.mean_alignment_weights >= thresholds.align_min;
    nr.align_delta_pass = nr.mean_alignment_delta >= thresholds.align_min;

    rep.notes.push_back(
        "Neurons outside the large set are treated as the small-norm class; the lower-bound form of their norm "
        "condition is read as an upper bound.");
    if (!last.a.data().empty()) {
        bool tied = true;
        for (std::size_t i = 0; i < last.a.rows() && tied; ++i) {
            for (std::size_t l = 1; l < last.a.cols(); ++l) {
                if (last.a(i, l) != last.a(i, 0)) {
                    tied = false;
                    break;
                }
            }
        }
        if (!tied) {
            rep.notes.push_back("Output columns a_(l) are not tied; neuron targets use the sign of column 0.");
        }
    }
    return rep;
}

}  // namespace lrlab
