#include "lrlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lrlab/errors.hpp"
#include "lrlab/io.hpp"
#include "lrlab/rng.hpp"

namespace lrlab {

namespace {

constexpr std::string_view kModule = "model";
constexpr std::string_view kParamsMagic = "LRPS";
constexpr std::uint32_t kParamsVersion = 1;

[[noreturn]] void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, kModule, what);
}

void check_example(const Params& p, const Example& ex) {
    if (ex.x.rows() != p.dims.d || ex.x.cols() != p.dims.L) {
        fail(ErrorKind::shape, "token matrix is " + std::to_string(ex.x.rows()) + "x" + std::to_string(ex.x.cols()) +
                                   ", model expects " + std::to_string(p.dims.d) + "x" + std::to_string(p.dims.L));
    }
    if (ex.s_set.empty()) {
        fail(ErrorKind::invalid_argument, "example has an empty output index set");
    }
}

// In-place max-subtracted softmax.
void softmax(std::span<double> z) {
    const double mx = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double& v : z) {
        v = std::exp(v - mx);
        total += v;
    }
    for (double& v : z) {
        v /= total;
    }
}

}  // namespace

void ModelConfig::validate() const {
    if (m == 0 || m_a == 0 || m_b == 0) {
        fail(ErrorKind::invalid_argument, "m, m_a and m_b must be positive");
    }
    if (!(delta > 0.0 && delta <= 0.2)) {
        fail(ErrorKind::invalid_argument, "delta must lie in (0, 0.2]");
    }
    if (!(xi > 0.0) || !std::isfinite(xi)) {
        fail(ErrorKind::invalid_argument, "xi must be positive");
    }
}

Dims make_dims(const DataConfig& data, const ModelConfig& model) {
    return Dims{data.d, data.L, data.M, model.m, model.m_a, model.m_b};
}

Params init_params(const ModelConfig& mc, const Dims& dims) {
    mc.validate();
    if (dims.d == 0 || dims.L == 0 || dims.m == 0 || dims.m_a == 0 || dims.m_b == 0) {
        fail(ErrorKind::invalid_argument, "all model dimensions must be positive");
    }
    Params p{Matrix(dims.m_b, dims.d), Matrix(dims.m_b, dims.d), Matrix(dims.m_a, dims.d),
             Matrix(dims.m, dims.m_a), Matrix(dims.m, dims.L), dims};
    for (std::size_t i = 0; i < std::min(dims.m_b, dims.d); ++i) {
        p.w_q(i, i) = mc.delta;
        p.w_k(i, i) = mc.delta;
    }
    for (std::size_t i = 0; i < std::min(dims.m_a, dims.d); ++i) {
        p.w_v(i, i) = mc.delta;
    }

    Rng rng(mc.seed);
    for (double& x : p.w_o.data()) {
        x = mc.xi * rng.normal();
    }
    const double amp = 1.0 / std::sqrt(static_cast<double>(dims.m));
    for (std::size_t i = 0; i < dims.m; ++i) {
        for (std::size_t l = 0; l < dims.L; ++l) {
            if (mc.tied_a && l > 0) {
                p.a(i, l) = p.a(i, 0);
            } else {
                p.a(i, l) = rng.coin() ? amp : -amp;
            }
        }
    }
    return p;
}

Vector attention_weights(const Params& params, const Matrix& x, std::size_t l) {
    if (l >= x.cols()) {
        fail(ErrorKind::invalid_argument, "query index out of range");
    }
    const Matrix keys = matmul(params.w_k, x);
    const Vector query = matvec(params.w_q, x.col(l));
    Vector z = matvec_t(keys, query);
    softmax(z);
    return z;
}

ForwardTrace forward_trace(const Params& params, const Example& example) {
    check_example(params, example);
    const Dims& dm = params.dims;
    const std::size_t L = dm.L;
    const std::size_t ns = example.s_set.size();

    ForwardTrace t{matmul(params.w_k, example.x), matmul(params.w_q, example.x), matmul(params.w_v, example.x),
                   Matrix(L, ns), Matrix(dm.m_a, ns), Matrix(dm.m, ns), 0.0};

    Vector logits(L);
    Vector query(dm.m_b);
    double total = 0.0;
    for (std::size_t k = 0; k < ns; ++k) {
        const std::size_t l = example.s_set[k];
        for (std::size_t r = 0; r < dm.m_b; ++r) {
            query[r] = t.queries(r, l);
        }
        std::fill(logits.begin(), logits.end(), 0.0);
        for (std::size_t r = 0; r < dm.m_b; ++r) {
            const double q = query[r];
            auto krow = t.keys.row(r);
            for (std::size_t j = 0; j < L; ++j) {
                logits[j] += krow[j] * q;
            }
        }
        softmax(logits);
        t.attn.set_col(k, logits);

        for (std::size_t r = 0; r < dm.m_a; ++r) {
            t.mixed(r, k) = dot(t.values.row(r), logits);
        }
        double out = 0.0;
        for (std::size_t i = 0; i < dm.m; ++i) {
            auto orow = params.w_o.row(i);
            double h = 0.0;
            for (std::size_t r = 0; r < dm.m_a; ++r) {
                h += orow[r] * t.mixed(r, k);
            }
            t.preact(i, k) = h;
            if (h > 0.0) {
                out += params.a(i, l) * h;
            }
        }
        total += out;
    }
    t.output = total / static_cast<double>(ns);
    return t;
}

double forward(const Params& params, const Example& example) {
    return forward_trace(params, example).output;
}

double hinge_loss(double f_value, int y) noexcept {
    return std::max(1.0 - static_cast<double>(y) * f_value, 0.0);
}

double empirical_risk(const Params& params, const Dataset& dataset) {
    if (dataset.examples.empty()) {
        fail(ErrorKind::invalid_argument, "empirical risk of an empty dataset");
    }
    double total = 0.0;
    for (const Example& ex : dataset.examples) {
        total += hinge_loss(forward(params, ex), ex.y);
    }
    return total / static_cast<double>(dataset.size());
}

Metrics evaluate(const Params& params, const Dataset& testset) {
    if (testset.examples.empty()) {
        fail(ErrorKind::invalid_argument, "cannot evaluate on an empty test set");
    }
    double hinge = 0.0;
    double wrong = 0.0;
    double attn = 0.0;
    for (const Example& ex : testset.examples) {
        const ForwardTrace t = forward_trace(params, ex);
        hinge += hinge_loss(t.output, ex.y);
        if (static_cast<double>(ex.y) * t.output <= 0.0) {
            wrong += 1.0;
        }
        double mass = 0.0;
        for (std::size_t k = 0; k < ex.s_set.size(); ++k) {
            for (std::size_t j = 0; j < ex.provenance.size(); ++j) {
                if (ex.provenance[j].role == TokenRole::label_relevant) {
                    mass += t.attn(j, k);
                }
            }
        }
        attn += mass / static_cast<double>(ex.s_set.size());
    }
    const double n = static_cast<double>(testset.size());
    return Metrics{hinge / n, wrong / n, attn / n};
}

void save_params(const Params& params, const std::filesystem::path& path) {
    const Dims& dm = params.dims;
    io::ByteWriter w;
    w.put_bytes(kParamsMagic);
    w.put_u32(kParamsVersion);
    for (std::size_t v : {dm.d, dm.L, dm.M, dm.m, dm.m_a, dm.m_b}) {
        w.put_u64(v);
    }
    for (const Matrix* m : {&params.w_q, &params.w_k, &params.w_v, &params.w_o, &params.a}) {
        w.put_f64s(m->data());
    }
    io::write_atomic(path, w.str());
}

Params load_params(const std::filesystem::path& path) {
    const std::string raw = io::read_file(path);
    io::ByteReader r(raw);
    if (r.get_bytes(4) != kParamsMagic || r.get_u32() != kParamsVersion) {
        fail(ErrorKind::invalid_input, path.string() + " is not a weight snapshot");
    }
    Dims dm;
    dm.d = r.get_u64();
    dm.L = r.get_u64();
    dm.M = r.get_u64();
    dm.m = r.get_u64();
    dm.m_a = r.get_u64();
    dm.m_b = r.get_u64();
    if (dm.d == 0 || dm.L == 0 || dm.m == 0 || dm.m_a == 0 || dm.m_b == 0 || dm.d > (1u << 20) ||
        dm.m > (1u << 24) || dm.m_a > (1u << 20) || dm.m_b > (1u << 20) || dm.L > (1u << 20)) {
        fail(ErrorKind::invalid_input, "implausible dimensions in weight snapshot");
    }
    Params p{Matrix(dm.m_b, dm.d), Matrix(dm.m_b, dm.d), Matrix(dm.m_a, dm.d), Matrix(dm.m, dm.m_a),
             Matrix(dm.m, dm.L), dm};
    for (Matrix* m : {&p.w_q, &p.w_k, &p.w_v, &p.w_o, &p.a}) {
        r.get_f64s(m->data());
    }
    if (!r.at_end()) {
        fail(ErrorKind::invalid_input, "trailing bytes in weight snapshot");
    }
    return p;
}

}  // namespace lrlab
