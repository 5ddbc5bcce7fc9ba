#include "lrlab/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lrlab/errors.hpp"
#include "lrlab/rng.hpp"

namespace lrlab {

namespace {

constexpr std::string_view kModule = "gradients";

std::array<Matrix*, 4> trainable(Params& p) { return {&p.w_q, &p.w_k, &p.w_v, &p.w_o}; }
std::array<Matrix*, 4> slots(GradSet& g) { return {&g.g_q, &g.g_k, &g.g_v, &g.g_o}; }
std::array<const Matrix*, 4> slots(const GradSet& g) { return {&g.g_q, &g.g_k, &g.g_v, &g.g_o}; }

// Hinge state followed by the sign of every Relu preactivation.
std::vector<bool> activation_pattern(const Params& p, const Example& ex) {
    const ForwardTrace t = forward_trace(p, ex);
    std::vector<bool> pattern;
    pattern.reserve(t.preact.size() + 1);
    pattern.push_back(1.0 - static_cast<double>(ex.y) * t.output > 0.0);
    for (double h : t.preact.data()) {
        pattern.push_back(h > 0.0);
    }
    return pattern;
}

}  // namespace

GradSet GradSet::zeros_like(const Params& p) {
    return GradSet{Matrix(p.w_q.rows(), p.w_q.cols()), Matrix(p.w_k.rows(), p.w_k.cols()),
                   Matrix(p.w_v.rows(), p.w_v.cols()), Matrix(p.w_o.rows(), p.w_o.cols())};
}

GradSet& GradSet::operator+=(const GradSet& rhs) {
    g_q += rhs.g_q;
    g_k += rhs.g_k;
    g_v += rhs.g_v;
    g_o += rhs.g_o;
    return *this;
}

GradSet& GradSet::operator*=(double s) {
    g_q *= s;
    g_k *= s;
    g_v *= s;
    g_o *= s;
    return *this;
}

GradSet backward(const Params& params, const Example& example) {
    const ForwardTrace t = forward_trace(params, example);
    GradSet g = GradSet::zeros_like(params);
    const double margin = 1.0 - static_cast<double>(example.y) * t.output;
    if (margin <= 0.0) {
        return g;
    }

    const Dims& dm = params.dims;
    const std::size_t L = dm.L;
    const std::size_t ns = example.s_set.size();
    const double coef = -static_cast<double>(example.y) / static_cast<double>(ns);

    Matrix d_values(dm.m_a, L);
    Matrix d_keys(dm.m_b, L);
    Matrix d_queries(dm.m_b, L);
    Vector dh(dm.m);
    Vector dc(dm.m_a);
    Vector ds(L);
    Vector dz(L);

    for (std::size_t k = 0; k < ns; ++k) {
        const std::size_t l = example.s_set[k];

        // through a_(l)^T Relu(.)
        for (std::size_t i = 0; i < dm.m; ++i) {
            dh[i] = t.preact(i, k) > 0.0 ? coef * params.a(i, l) : 0.0;
        }
        // W_O and the attended value vector
        std::fill(dc.begin(), dc.end(), 0.0);
        for (std::size_t i = 0; i < dm.m; ++i) {
            if (dh[i] == 0.0) {
                continue;
            }
            auto orow = params.w_o.row(i);
            auto grow = g.g_o.row(i);
            for (std::size_t r = 0; r < dm.m_a; ++r) {
                grow[r] += dh[i] * t.mixed(r, k);
                dc[r] += dh[i] * orow[r];
            }
        }
        // mixed = values * s
        for (std::size_t j = 0; j < L; ++j) {
            const double sj = t.attn(j, k);
            double acc = 0.0;
            for (std::size_t r = 0; r < dm.m_a; ++r) {
                d_values(r, j) += dc[r] * sj;
                acc += dc[r] * t.values(r, j);
            }
            ds[j] = acc;
        }
        // softmax Jacobian diag(s) - s s^T
        double weighted = 0.0;
        for (std::size_t j = 0; j < L; ++j) {
            weighted += t.attn(j, k) * ds[j];
        }
        for (std::size_t j = 0; j < L; ++j) {
            dz[j] = t.attn(j, k) * (ds[j] - weighted);
        }
        // logits_j = keys_j . queries_l
        for (std::size_t r = 0; r < dm.m_b; ++r) {
            const double q = t.queries(r, l);
            double acc = 0.0;
            for (std::size_t j = 0; j < L; ++j) {
                d_keys(r, j) += dz[j] * q;
                acc += dz[j] * t.keys(r, j);
            }
            d_queries(r, l) += acc;
        }
    }

    g.g_v = matmul_nt(d_values, example.x);
    g.g_k = matmul_nt(d_keys, example.x);
    g.g_q = matmul_nt(d_queries, example.x);
    return g;
}

GradSet batch_gradient(const Params& params, std::span<const Example* const> batch) {
    if (batch.empty()) {
        throw Error(ErrorKind::invalid_argument, kModule, "batch gradient of an empty batch");
    }
    GradSet total = GradSet::zeros_like(params);
    for (const Example* ex : batch) {
        total += backward(params, *ex);
    }
    total *= 1.0 / static_cast<double>(batch.size());
    return total;
}

GradSet finite_diff_grad(const Params& params, const LossFn& loss, double eps) {
    if (!(eps > 0.0)) {
        throw Error(ErrorKind::invalid_argument, kModule, "finite difference step must be positive");
    }
    Params work = params;
    GradSet g = GradSet::zeros_like(params);
    auto targets = trainable(work);
    auto outs = slots(g);
    for (std::size_t w = 0; w < targets.size(); ++w) {
        auto entries = targets[w]->data();
        auto grad = outs[w]->data();
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const double orig = entries[i];
            entries[i] = orig + eps;
            const double up = loss(work);
            entries[i] = orig - eps;
            const double down = loss(work);
            entries[i] = orig;
            grad[i] = (up - down) / (2.0 * eps);
        }
    }
    return g;
}

GradSet finite_diff_grad(const Params& params, const Example& example, double eps) {
    const std::vector<bool> base = activation_pattern(params, example);
    return finite_diff_grad(
        params,
        [&](const Params& p) {
            if (activation_pattern(p, example) != base) {
                throw Error(ErrorKind::degenerate, kModule, "finite difference probe crosses a hinge or Relu kink");
            }
            return hinge_loss(forward(p, example), example.y);
        },
        eps);
}

double relative_error(const Matrix& analytic, const Matrix& numeric) {
    return (analytic - numeric).frobenius() / std::max(numeric.frobenius(), 1e-12);
}

GradCheckReport check_gradients(std::size_t trials, std::uint64_t seed, double eps) {
    if (trials == 0) {
        throw Error(ErrorKind::invalid_argument, kModule, "gradient check needs at least one trial");
    }
    const Dims dm{4, 3, 4, 6, 4, 4};
    Rng rng(seed);
    GradCheckReport report;
    report.trials = trials;

    auto fill = [&](Matrix& m, double scale) {
        for (double& x : m.data()) {
            x = scale * rng.normal();
        }
    };

    std::size_t done = 0;
    while (done < trials) {
        Params p{Matrix(dm.m_b, dm.d), Matrix(dm.m_b, dm.d), Matrix(dm.m_a, dm.d), Matrix(dm.m, dm.m_a),
                 Matrix(dm.m, dm.L), dm};
        fill(p.w_q, 0.7);
        fill(p.w_k, 0.7);
        fill(p.w_v, 0.7);
        fill(p.w_o, 1.0);
        const double amp = 1.0 / std::sqrt(static_cast<double>(dm.m));
        for (double& x : p.a.data()) {
            x = rng.coin() ? amp : -amp;
        }
        Example ex{Matrix(dm.d, dm.L), 1, std::vector<TokenTag>(dm.L), {0, 1, 2}};
        fill(ex.x, 1.0);
        // pick the label that keeps the hinge active (margin >= 1)
        ex.y = forward(p, ex) >= 0.0 ? -1 : 1;

        GradSet numeric = GradSet::zeros_like(p);
        try {
            numeric = finite_diff_grad(p, ex, eps);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::degenerate) {
                throw;
            }
            ++report.resamples;
            continue;
        }
        const GradSet analytic = backward(p, ex);
        const auto a_slots = slots(analytic);
        const auto n_slots = slots(numeric);
        for (std::size_t w = 0; w < 4; ++w) {
            const double err = relative_error(*a_slots[w], *n_slots[w]);
            report.per_matrix[w] = std::max(report.per_matrix[w], err);
            report.max_rel_error = std::max(report.max_rel_error, err);
        }
        ++done;
    }
    return report;
}

}  // namespace lrlab
