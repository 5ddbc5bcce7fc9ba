#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace lrlab {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Always at least 1x1.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);
    static Matrix outer(std::span<const double> u, std::span<const double> v);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
    Vector col(std::size_t c) const;
    void set_col(std::size_t c, std::span<const double> values);

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    Matrix transpose() const;
    double frobenius() const noexcept;
    bool all_finite() const noexcept;
    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    Matrix& operator+=(const Matrix& rhs);
    Matrix& operator-=(const Matrix& rhs);
    Matrix& operator*=(double s) noexcept;

    // this += s * rhs
    void axpy(double s, const Matrix& rhs);

    bool operator==(const Matrix& rhs) const noexcept = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

Matrix operator+(Matrix lhs, const Matrix& rhs);
Matrix operator-(Matrix lhs, const Matrix& rhs);
Matrix operator*(Matrix lhs, double s);
Matrix operator*(double s, Matrix rhs);

Matrix matmul(const Matrix& a, const Matrix& b);
// a^T * b without forming the transpose.
Matrix matmul_tn(const Matrix& a, const Matrix& b);
// a * b^T without forming the transpose.
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, std::span<const double> x);
// a^T * x
Vector matvec_t(const Matrix& a, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double norm2(std::span<const double> a) noexcept;

// Largest absolute entrywise difference; shapes must match.
double max_abs_diff(const Matrix& a, const Matrix& b);

struct SvdResult {
    Matrix u;   // rows x k, orthonormal columns
    Vector s;   // k = min(rows, cols) values, descending, nonnegative
    Matrix v;   // cols x k, orthonormal columns

    Matrix reconstruct() const;
};

// Thin SVD by one-sided (Hestenes) Jacobi rotations. Deterministic.
// Throws ErrorKind::invalid_input for non-finite entries.
SvdResult svd(const Matrix& a);

// Best rank-r approximation sum_{i<=r} s_i u_i v_i^T. Throws for r == 0.
Matrix truncate_rank(const Matrix& a, std::size_t r);
Matrix truncate_rank(const SvdResult& f, std::size_t r);

// count_vectors x dim matrix with orthonormal rows: Gaussian draw followed by
// modified Gram-Schmidt with one re-orthogonalization pass.
Matrix random_orthonormal(std::size_t count_vectors, std::size_t dim, std::uint64_t seed);

Vector row_norms(const Matrix& a);

}  // namespace lrlab
