#include "lrlab/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

#include "lrlab/errors.hpp"
#include "lrlab/rng.hpp"

namespace lrlab {

namespace {

constexpr std::string_view kModule = "linalg";

[[noreturn]] void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, kModule, what);
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        fail(ErrorKind::shape, std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                                   std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                   "x" + std::to_string(b.cols()));
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols) : Matrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
    if (rows == 0 || cols == 0) {
        fail(ErrorKind::invalid_argument, "matrix dimensions must be positive");
    }
    if (data_.size() != rows * cols) {
        fail(ErrorKind::invalid_argument, "entry count does not match rows x cols");
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    if (rows_ == 0 || cols_ == 0) {
        fail(ErrorKind::invalid_argument, "matrix dimensions must be positive");
    }
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            fail(ErrorKind::invalid_argument, "ragged initializer list");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) {
        m(i, i) = diag[i];
    }
    return m;
}

Matrix Matrix::outer(std::span<const double> u, std::span<const double> v) {
    Matrix m(u.size(), v.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
            m(i, j) = u[i] * v[j];
        }
    }
    return m;
}

Vector Matrix::col(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        out[r] = (*this)(r, c);
    }
    return out;
}

void Matrix::set_col(std::size_t c, std::span<const double> values) {
    for (std::size_t r = 0; r < rows_; ++r) {
        (*this)(r, c) = values[r];
    }
}

Matrix Matrix::transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            t(c, r) = (*this)(r, c);
        }
    }
    return t;
}

double Matrix::frobenius() const noexcept {
    return norm2(data_);
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

Matrix& Matrix::operator+=(const Matrix& rhs) {
    require_same_shape(*this, rhs, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += rhs.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& rhs) {
    require_same_shape(*this, rhs, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= rhs.data_[i];
    }
    return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
    for (double& x : data_) {
        x *= s;
    }
    return *this;
}

void Matrix::axpy(double s, const Matrix& rhs) {
    require_same_shape(*this, rhs, "axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += s * rhs.data_[i];
    }
}

Matrix operator+(Matrix lhs, const Matrix& rhs) { return lhs += rhs; }
Matrix operator-(Matrix lhs, const Matrix& rhs) { return lhs -= rhs; }
Matrix operator*(Matrix lhs, double s) { return lhs *= s; }
Matrix operator*(double s, Matrix rhs) { return rhs *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        fail(ErrorKind::shape, "matmul inner dimensions differ");
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto crow = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            auto brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                crow[j] += aik * brow[j];
            }
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        fail(ErrorKind::shape, "matmul_tn row counts differ");
    }
    Matrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        auto arow = a.row(k);
        auto brow = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = arow[i];
            if (aki == 0.0) {
                continue;
            }
            auto crow = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                crow[j] += aki * brow[j];
            }
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        fail(ErrorKind::shape, "matmul_nt column counts differ");
    }
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            c(i, j) = dot(a.row(i), b.row(j));
        }
    }
    return c;
}

Vector matvec(const Matrix& a, std::span<const double> x) {
    if (a.cols() != x.size()) {
        fail(ErrorKind::shape, "matvec dimension mismatch");
    }
    Vector y(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        y[i] = dot(a.row(i), x);
    }
    return y;
}

Vector matvec_t(const Matrix& a, std::span<const double> x) {
    if (a.rows() != x.size()) {
        fail(ErrorKind::shape, "matvec_t dimension mismatch");
    }
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) {
            continue;
        }
        auto arow = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            y[j] += xi * arow[j];
        }
    }
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm2(std::span<const double> a) noexcept {
    // scaled accumulation avoids overflow for large entries
    double scale = 0.0;
    double ssq = 1.0;
    for (double x : a) {
        if (x == 0.0) {
            continue;
        }
        const double ax = std::abs(x);
        if (scale < ax) {
            ssq = 1.0 + ssq * (scale / ax) * (scale / ax);
            scale = ax;
        } else {
            ssq += (ax / scale) * (ax / scale);
        }
    }
    return scale * std::sqrt(ssq);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "max_abs_diff");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
    }
    return worst;
}

Matrix SvdResult::reconstruct() const {
    Matrix us = u;
    for (std::size_t r = 0; r < us.rows(); ++r) {
        for (std::size_t c = 0; c < s.size(); ++c) {
            us(r, c) *= s[c];
        }
    }
    return matmul_nt(us, v);
}

namespace {

// Fills columns [first, k) of q (n x k, columns [0, first) orthonormal) with an
// orthonormal completion drawn from the canonical basis.
void complete_basis(Matrix& q, std::size_t first) {
    const std::size_t n = q.rows();
    const std::size_t k = q.cols();
    std::size_t candidate = 0;
    for (std::size_t c = first; c < k; ++c) {
        while (candidate < n) {
            Vector e(n, 0.0);
            e[candidate++] = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t p = 0; p < c; ++p) {
                    const Vector qp = q.col(p);
                    const double proj = dot(qp, e);
                    for (std::size_t i = 0; i < n; ++i) {
                        e[i] -= proj * qp[i];
                    }
                }
            }
            const double nrm = norm2(e);
            if (nrm > 0.5) {
                for (double& x : e) {
                    x /= nrm;
                }
                q.set_col(c, e);
                break;
            }
        }
    }
}

// One-sided Jacobi on a tall matrix (rows >= cols).
SvdResult jacobi_tall(const Matrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();

    // Work column-major: w[j] is column j of the evolving A*V.
    std::vector<Vector> w(n, Vector(m));
    std::vector<Vector> v(n, Vector(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
            w[j][i] = a(i, j);
        }
        v[j][j] = 1.0;
    }

    const double tol = std::numeric_limits<double>::epsilon() * std::max(4.0, static_cast<double>(m));
    constexpr int max_sweeps = 80;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = dot(w[p], w[p]);
                const double beta = dot(w[q], w[q]);
                const double gamma = dot(w[p], w[q]);
                if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) {
                    continue;
                }
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::hypot(1.0, t);
                const double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    const double wp = w[p][i];
                    const double wq = w[q][i];
                    w[p][i] = c * wp - s * wq;
                    w[q][i] = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vp = v[p][i];
                    const double vq = v[q][i];
                    v[p][i] = c * vp - s * vq;
                    v[q][i] = s * vp + c * vq;
                }
            }
        }
        if (!rotated) {
            break;
        }
    }

    Vector sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        sigma[j] = norm2(w[j]);
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

    const double smax = n > 0 ? sigma[order[0]] : 0.0;
    const double zero_cut = smax * static_cast<double>(std::max(m, n)) * std::numeric_limits<double>::epsilon();

    SvdResult out{Matrix(m, n), Vector(n), Matrix(n, n)};
    std::size_t kept = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = order[k];
        out.s[k] = sigma[j];
        for (std::size_t i = 0; i < n; ++i) {
            out.v(i, k) = v[j][i];
        }
        if (sigma[j] > zero_cut && sigma[j] > 0.0) {
            for (std::size_t i = 0; i < m; ++i) {
                out.u(i, k) = w[j][i] / sigma[j];
            }
            kept = k + 1;
        }
    }
    // numerically null directions: keep the value, replace u by a clean completion
    for (std::size_t k = kept; k < n; ++k) {
        out.s[k] = 0.0;
    }
    complete_basis(out.u, kept);
    return out;
}

}  // namespace

SvdResult svd(const Matrix& a) {
    if (!a.all_finite()) {
        fail(ErrorKind::invalid_input, "svd input contains non-finite entries");
    }
    if (a.rows() >= a.cols()) {
        return jacobi_tall(a);
    }
    SvdResult t = jacobi_tall(a.transpose());
    return SvdResult{std::move(t.v), std::move(t.s), std::move(t.u)};
}

Matrix truncate_rank(const SvdResult& f, std::size_t r) {
    if (r == 0) {
        fail(ErrorKind::invalid_argument, "truncate_rank requires r >= 1");
    }
    const std::size_t k = std::min(r, f.s.size());
    Matrix out(f.u.rows(), f.v.rows());
    for (std::size_t c = 0; c < k; ++c) {
        const double sc = f.s[c];
        if (sc == 0.0) {
            continue;
        }
        for (std::size_t i = 0; i < out.rows(); ++i) {
            const double ui = sc * f.u(i, c);
            for (std::size_t j = 0; j < out.cols(); ++j) {
                out(i, j) += ui * f.v(j, c);
            }
        }
    }
    return out;
}

Matrix truncate_rank(const Matrix& a, std::size_t r) {
    if (r == 0) {
        fail(ErrorKind::invalid_argument, "truncate_rank requires r >= 1");
    }
    return truncate_rank(svd(a), r);
}

Matrix random_orthonormal(std::size_t count_vectors, std::size_t dim, std::uint64_t seed) {
    if (count_vectors == 0 || dim == 0) {
        fail(ErrorKind::invalid_argument, "random_orthonormal needs positive sizes");
    }
    if (count_vectors > dim) {
        fail(ErrorKind::invalid_argument, "cannot draw " + std::to_string(count_vectors) +
                                              " orthonormal vectors in dimension " + std::to_string(dim));
    }
    Rng rng(seed);
    Matrix q(count_vectors, dim);
    for (std::size_t r = 0; r < count_vectors; ++r) {
        auto row = q.row(r);
        for (;;) {
            for (double& x : row) {
                x = rng.normal();
            }
            const double before = norm2(row);
            for (int pass = 0; pass < 2; ++pass) {
                for (std::size_t p = 0; p < r; ++p) {
                    const double proj = dot(q.row(p), row);
                    auto prow = q.row(p);
                    for (std::size_t i = 0; i < dim; ++i) {
                        row[i] -= proj * prow[i];
                    }
                }
            }
            const double after = norm2(row);
            // a draw almost inside the span of earlier rows is redrawn
            if (after > 1e-6 * before) {
                for (double& x : row) {
                    x /= after;
                }
                break;
            }
        }
    }
    return q;
}

Vector row_norms(const Matrix& a) {
    Vector out(a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        out[r] = norm2(a.row(r));
    }
    return out;
}

}  // namespace lrlab
