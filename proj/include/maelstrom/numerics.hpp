#pragma once

// Dense linear algebra for desk-scale problems (a few thousand units at most).
// Storage is always dense row-major double precision; sparsity only exists as
// a property of randomly generated matrices.

#include <cstddef>
#include <span>
#include <vector>

#include "maelstrom/rng.hpp"

namespace maelstrom {

using Vector = std::vector<double>;

class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    /// Throws ShapeError if data.size() != rows*cols, InputError on non-finite entries.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> diag);
    /// Single column matrix holding v.
    static Matrix column(std::span<const double> v);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool square() const noexcept { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    Matrix scaled(double factor) const;
    Matrix transposed() const;
    void fill(double value);

    bool operator==(const Matrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm(std::span<const double> v);
/// a - b
Vector difference(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> v);

/// A * x
Vector matvec(const Matrix& a, std::span<const double> x);
/// out += A * x
void matvec_accumulate(const Matrix& a, std::span<const double> x, std::span<double> out);
/// A^T * y
Vector matvec_transposed(const Matrix& a, std::span<const double> y);
Matrix matmul(const Matrix& a, const Matrix& b);

/// Each entry is nonzero with probability `density`; nonzero entries are
/// uniform in [low, high]. Entries are drawn in row-major order.
Matrix random_sparse_matrix(std::size_t rows, std::size_t cols, double density, double low,
                            double high, Rng& rng);
Matrix random_uniform_matrix(std::size_t rows, std::size_t cols, double low, double high,
                             Rng& rng);

struct PowerIterationOptions {
    std::size_t max_iters = 1000;
    double tol = 1e-10;
};

struct SpectralEstimate {
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Dominant |eigenvalue| by power iteration from the all-ones vector.
///
/// Each iterate is refined by a Rayleigh-Ritz projection onto an 8-dimensional
/// Krylov space, so complex-conjugate pairs and near-ties in magnitude (common
/// for random non-symmetric matrices) resolve without waiting for the
/// power iterate to separate them. One iteration costs 16 products with W.
SpectralEstimate spectral_radius(const Matrix& w, PowerIterationOptions opts = {});

/// Largest singular value via power iteration on W^T W.
SpectralEstimate spectral_norm(const Matrix& w, PowerIterationOptions opts = {});

/// W * (target / spectral_radius(W)). Throws UnscalableError when the radius is zero.
Matrix scale_to_spectral_radius(const Matrix& w, double target, PowerIterationOptions opts = {});

/// Solve A X = B for symmetric positive definite A by Cholesky factorization.
/// Throws SolverError when A is not numerically positive definite.
Matrix cholesky_solve(const Matrix& a, const Matrix& b);

/// Ridge least squares with samples as rows: returns B (features x outputs)
/// minimizing ||X B - Y||^2 + lambda ||B||^2 via the normal equations.
/// Throws SolverError (suggesting lambda > 0) when X^T X + lambda I is singular.
Matrix ridge_regression(const Matrix& x, const Matrix& y, double lambda);

}  // namespace maelstrom
