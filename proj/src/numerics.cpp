#include "maelstrom/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "maelstrom/error.hpp"

namespace maelstrom {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                         std::to_string(rows_ * cols_));
    }
    if (!all_finite(data_)) throw InputError("matrix entries must be finite");
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
    Matrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

Matrix Matrix::column(std::span<const double> v) {
    return Matrix(v.size(), 1, std::vector<double>(v.begin(), v.end()));
}

Matrix Matrix::scaled(double factor) const {
    Matrix out = *this;
    for (double& x : out.data_) x *= factor;
    return out;
}

Matrix Matrix::transposed() const {
    Matrix out(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
}

void Matrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

Vector difference(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("difference: length mismatch");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void matvec_accumulate(const Matrix& a, std::span<const double> x, std::span<double> out) {
    if (a.cols() != x.size() || a.rows() != out.size()) {
        throw ShapeError("matvec: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " matrix against vector of length " + std::to_string(x.size()));
    }
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row(r);
        double s = 0.0;
        for (std::size_t c = 0; c < row.size(); ++c) s += row[c] * x[c];
        out[r] += s;
    }
}

Vector matvec(const Matrix& a, std::span<const double> x) {
    Vector out(a.rows(), 0.0);
    matvec_accumulate(a, x, out);
    return out;
}

Vector matvec_transposed(const Matrix& a, std::span<const double> y) {
    if (a.rows() != y.size()) throw ShapeError("matvec_transposed: length mismatch");
    Vector out(a.cols(), 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto row = a.row(r);
        const double yr = y[r];
        for (std::size_t c = 0; c < row.size(); ++c) out[c] += row[c] * yr;
    }
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimensions differ");
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const auto brow = b.row(k);
            auto orow = out.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
        }
    }
    return out;
}

Matrix random_sparse_matrix(std::size_t rows, std::size_t cols, double density, double low,
                            double high, Rng& rng) {
    if (rows == 0 || cols == 0) throw ConfigError("random matrix needs rows, cols >= 1");
    if (!(density > 0.0 && density <= 1.0)) throw ConfigError("density must lie in (0, 1]");
    if (!(low < high) || !std::isfinite(low) || !std::isfinite(high)) {
        throw ConfigError("random matrix bounds need low < high");
    }
    Matrix m(rows, cols);
    for (double& x : m.data()) {
        if (density < 1.0 && !rng.bernoulli(density)) continue;
        x = std::min(rng.uniform(low, high), high);
    }
    return m;
}

Matrix random_uniform_matrix(std::size_t rows, std::size_t cols, double low, double high,
                             Rng& rng) {
    return random_sparse_matrix(rows, cols, 1.0, low, high, rng);
}

namespace {

using Complex = std::complex<double>;

/// Krylov dimension of the Rayleigh-Ritz step.
constexpr std::size_t kRitzDim = 8;

void normalize(Vector& v, double n) {
    for (double& x : v) x /= n;
}

/// Coefficients (ascending, monic) of det(zI - H) for an m x m upper
/// Hessenberg H stored row-major.
std::vector<double> hessenberg_char_poly(const std::vector<double>& h, std::size_t m) {
    auto at = [&](std::size_t i, std::size_t j) { return h[(i - 1) * m + (j - 1)]; };
    std::vector<std::vector<double>> p(m + 1);
    p[0] = {1.0};
    for (std::size_t k = 1; k <= m; ++k) {
        std::vector<double> next(k + 1, 0.0);
        for (std::size_t d = 0; d < k; ++d) {
            next[d + 1] += p[k - 1][d];
            next[d] -= at(k, k) * p[k - 1][d];
        }
        double sub = 1.0;
        for (std::size_t i = k - 1; i >= 1; --i) {
            sub *= at(i + 1, i);
            const double c = at(i, k) * sub;
            for (std::size_t d = 0; d < p[i - 1].size(); ++d) next[d] -= c * p[i - 1][d];
        }
        p[k] = std::move(next);
    }
    return p[m];
}

/// Largest |eigenvalue| of a small upper Hessenberg matrix, via Durand-Kerner
/// on its characteristic polynomial.
double largest_ritz_magnitude(std::vector<double> h, std::size_t m) {
    if (m == 1) return std::abs(h[0]);
    double scale = 0.0;
    for (double v : h) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return 0.0;
    for (double& v : h) v /= scale;
    const std::vector<double> coeffs = hessenberg_char_poly(h, m);
    auto eval = [&](Complex z) {
        Complex acc = 1.0;
        for (std::size_t d = m; d-- > 0;) acc = acc * z + coeffs[d];
        return acc;
    };
    std::vector<Complex> z(m);
    const Complex base(0.4, 0.9);
    Complex power = 1.0;
    for (Complex& zi : z) {
        zi = power;
        power *= base;
    }
    for (int iter = 0; iter < 2000; ++iter) {
        double largest_step = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            Complex denom = 1.0;
            for (std::size_t j = 0; j < m; ++j)
                if (j != i) denom *= z[i] - z[j];
            if (denom == Complex(0.0)) denom = 1e-300;
            const Complex delta = eval(z[i]) / denom;
            z[i] -= delta;
            largest_step = std::max(largest_step, std::abs(delta));
        }
        if (largest_step <= 1e-15) break;
    }
    double best = 0.0;
    for (const Complex& zi : z) best = std::max(best, std::abs(zi));
    return best * scale;
}

/// Arnoldi on span{q, Wq, ..., W^(m-1) q} with unit q; returns the Ritz
/// estimate of the dominant magnitude.
double arnoldi_ritz(const Matrix& w, const Vector& q, std::size_t m) {
    const std::size_t n = q.size();
    std::vector<Vector> basis{q};
    std::vector<double> h(m * m, 0.0);
    std::size_t used = m;
    for (std::size_t k = 0; k < m; ++k) {
        Vector v = matvec(w, basis[k]);
        const double scale = norm(v);
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t i = 0; i <= k; ++i) {
                const double c = dot(basis[i], v);
                h[i * m + k] += c;
                for (std::size_t r = 0; r < n; ++r) v[r] -= c * basis[i][r];
            }
        }
        if (k + 1 == m) break;
        const double residual = norm(v);
        if (residual <= 1e-13 * std::max(scale, 1e-300)) {
            used = k + 1;
            break;
        }
        h[(k + 1) * m + k] = residual;
        normalize(v, residual);
        basis.push_back(std::move(v));
    }
    std::vector<double> top(used * used);
    for (std::size_t i = 0; i < used; ++i)
        for (std::size_t j = 0; j < used; ++j) top[i * used + j] = h[i * m + j];
    return largest_ritz_magnitude(std::move(top), used);
}

}  // namespace

SpectralEstimate spectral_radius(const Matrix& w, PowerIterationOptions opts) {
    if (!w.square()) {
        throw ShapeError("spectral_radius needs a square matrix, got " + std::to_string(w.rows()) +
                         "x" + std::to_string(w.cols()));
    }
    const std::size_t n = w.rows();
    SpectralEstimate est;
    if (n == 0) {
        est.converged = true;
        return est;
    }
    const std::size_t m = std::min(n, kRitzDim);
    Vector q(n, 1.0 / std::sqrt(static_cast<double>(n)));
    double previous = -1.0;
    for (std::size_t k = 1; k <= opts.max_iters; ++k) {
        est.iterations = k;
        // m power steps amplify the dominant invariant subspace
        for (std::size_t s = 0; s < m; ++s) {
            Vector a = matvec(w, q);
            const double a_norm = norm(a);
            if (a_norm == 0.0) {
                est.value = 0.0;
                est.converged = true;
                return est;
            }
            normalize(a, a_norm);
            q = std::move(a);
        }
        const double current = arnoldi_ritz(w, q, m);
        est.value = current;
        if (previous >= 0.0 && std::abs(current - previous) <= opts.tol * std::max(current, 1e-300)) {
            est.converged = true;
            return est;
        }
        previous = current;
    }
    return est;
}

SpectralEstimate spectral_norm(const Matrix& w, PowerIterationOptions opts) {
    SpectralEstimate est;
    if (w.cols() == 0 || w.rows() == 0) {
        est.converged = true;
        return est;
    }
    Vector v(w.cols(), 1.0 / std::sqrt(static_cast<double>(w.cols())));
    double previous = -1.0;
    for (std::size_t k = 1; k <= opts.max_iters; ++k) {
        est.iterations = k;
        const Vector wv = matvec(w, v);
        const double sigma = norm(wv);  // sqrt of the Rayleigh quotient of W^T W at unit v
        Vector next = matvec_transposed(w, wv);
        const double next_norm = norm(next);
        est.value = sigma;
        if (next_norm == 0.0) {
            est.converged = true;
            return est;
        }
        if (previous >= 0.0 && std::abs(sigma - previous) <= opts.tol * std::max(sigma, 1e-300)) {
            est.converged = true;
            return est;
        }
        previous = sigma;
        normalize(next, next_norm);
        v = std::move(next);
    }
    return est;
}

Matrix scale_to_spectral_radius(const Matrix& w, double target, PowerIterationOptions opts) {
    if (!(target > 0.0)) throw ConfigError("target spectral radius must be positive");
    const double radius = spectral_radius(w, opts).value;
    const double scale_ref = norm(w.data());
    if (!(radius > 1e-12 * scale_ref) || radius == 0.0) {
        throw UnscalableError("matrix has zero spectral radius and cannot be rescaled");
    }
    return w.scaled(target / radius);
}

Matrix cholesky_solve(const Matrix& a, const Matrix& b) {
    if (!a.square()) throw ShapeError("cholesky_solve: matrix must be square");
    if (b.rows() != a.rows()) throw ShapeError("cholesky_solve: right-hand side row mismatch");
    const std::size_t n = a.rows();
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));

    // lower factor, row-major
    Matrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
        if (!(d > 1e-14 * max_diag) || !std::isfinite(d)) {
            throw SolverError("system is singular or not positive definite (pivot " +
                              std::to_string(j) + ")");
        }
        const double ljj = std::sqrt(d);
        l(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = a(i, j);
            const auto li = l.row(i);
            const auto lj = l.row(j);
            for (std::size_t k = 0; k < j; ++k) s -= li[k] * lj[k];
            l(i, j) = s / ljj;
        }
    }

    Matrix x = b;
    for (std::size_t col = 0; col < b.cols(); ++col) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = x(i, col);
            for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x(k, col);
            x(i, col) = s / l(i, i);
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = x(i, col);
            for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x(k, col);
            x(i, col) = s / l(i, i);
        }
    }
    return x;
}

Matrix ridge_regression(const Matrix& x, const Matrix& y, double lambda) {
    if (x.rows() != y.rows()) throw ShapeError("ridge_regression: sample counts differ");
    if (!(lambda >= 0.0)) throw ConfigError("ridge lambda must be >= 0");
    const std::size_t f = x.cols();
    Matrix gram(f, f);
    Matrix rhs(f, y.cols());
    for (std::size_t t = 0; t < x.rows(); ++t) {
        const auto xr = x.row(t);
        const auto yr = y.row(t);
        for (std::size_t i = 0; i < f; ++i) {
            const double xi = xr[i];
            if (xi == 0.0) continue;
            auto grow = gram.row(i);
            for (std::size_t j = i; j < f; ++j) grow[j] += xi * xr[j];
            auto rrow = rhs.row(i);
            for (std::size_t k = 0; k < yr.size(); ++k) rrow[k] += xi * yr[k];
        }
    }
    for (std::size_t i = 0; i < f; ++i) {
        gram(i, i) += lambda;
        for (std::size_t j = 0; j < i; ++j) gram(i, j) = gram(j, i);
    }
    try {
        return cholesky_solve(gram, rhs);
    } catch (const SolverError& e) {
        throw SolverError(std::string("ridge system is singular; use lambda > 0 (") + e.what() + ")");
    }
}

}  // namespace maelstrom
