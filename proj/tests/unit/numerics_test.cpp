#include <Eigen/Dense>
#include <cmath>

#include "doctest.h"
#include "maelstrom/error.hpp"
#include "maelstrom/numerics.hpp"

using namespace maelstrom;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd e(m.rows(), m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) e(r, c) = m(r, c);
    return e;
}

double eigen_radius(const Matrix& m) {
    return to_eigen(m).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("matrix construction validates shape and finiteness") {
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(Matrix(1, 2, std::vector<double>{1, NAN}), InputError);
    const Matrix m(2, 3, std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK(m(1, 0) == 4);
    CHECK(m.transposed()(2, 1) == 6);
    const Matrix p = matmul(m, m.transposed());
    CHECK(p(0, 0) == 14);
    CHECK(p(0, 1) == 32);
    CHECK(matvec_transposed(m, Vector{1, 1}) == Vector{5, 7, 9});
}

TEST_CASE("random_sparse_matrix") {
    SUBCASE("entries respect bounds even when the range is tiny") {
        Rng rng(1);
        const double high = 0.5;
        const double low = high - 1e-12;
        const Matrix m = random_sparse_matrix(20, 20, 1.0, low, high, rng);
        for (double v : m.data()) {
            CHECK(v >= low);
            CHECK(v <= high);
        }
    }
    SUBCASE("same seed gives identical draws") {
        Rng a(7);
        Rng b(7);
        CHECK(random_sparse_matrix(2, 2, 1.0, -1, 1, a) == random_sparse_matrix(2, 2, 1.0, -1, 1, b));
    }
    SUBCASE("nonzero count lands in the binomial band") {
        Rng rng(11);
        const Matrix m = random_sparse_matrix(100, 100, 0.1, -1, 1, rng);
        std::size_t nz = 0;
        for (double v : m.data()) nz += v != 0.0 ? 1 : 0;
        CHECK(nz >= 700);
        CHECK(nz <= 1300);
    }
    SUBCASE("invalid arguments") {
        Rng rng(0);
        CHECK_THROWS_AS(random_sparse_matrix(0, 2, 0.5, -1, 1, rng), ConfigError);
        CHECK_THROWS_AS(random_sparse_matrix(2, 2, 0.0, -1, 1, rng), ConfigError);
        CHECK_THROWS_AS(random_sparse_matrix(2, 2, 1.5, -1, 1, rng), ConfigError);
        CHECK_THROWS_AS(random_sparse_matrix(2, 2, 0.5, 1, 1, rng), ConfigError);
        CHECK_THROWS_AS(random_sparse_matrix(2, 2, NAN, -1, 1, rng), ConfigError);
    }
}

TEST_CASE("spectral_radius closed forms") {
    CHECK(spectral_radius(Matrix::identity(3)).value == doctest::Approx(1.0).epsilon(1e-12));
    const Matrix nilpotent(2, 2, std::vector<double>{0, 1, 0, 0});
    CHECK(spectral_radius(nilpotent).value == doctest::Approx(0.0).epsilon(1e-12));
    const Matrix swap(2, 2, std::vector<double>{0, 2, 2, 0});
    const SpectralEstimate s = spectral_radius(swap);
    CHECK(s.value == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(s.converged);
    CHECK_THROWS_AS(spectral_radius(Matrix(2, 3)), ShapeError);
}

TEST_CASE("spectral_radius matches a dense eigen-solver on random matrices") {
    // seed 8 has two conjugate pairs whose magnitudes differ by 3e-4
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        const Matrix w = random_sparse_matrix(50, 50, 0.2, -1, 1, rng);
        const double truth = eigen_radius(w);
        CHECK(spectral_radius(w).value == doctest::Approx(truth).epsilon(1e-6));
    }
}

TEST_CASE("spectral_radius on symmetric matrices with known spectrum") {
    // Q diag(l) Q^T with Q from a Householder reflector
    const std::vector<double> lambda = {-3.0, 2.5, 1.0, -0.5, 0.1};
    Vector v = {1, 2, -1, 0.5, 3};
    const double vv = dot(v, v);
    Matrix q = Matrix::identity(5);
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) q(i, j) -= 2.0 * v[i] * v[j] / vv;
    const Matrix a = matmul(matmul(q, Matrix::diagonal(lambda)), q.transposed());
    CHECK(spectral_radius(a).value == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(spectral_norm(a).value == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("spectral_norm") {
    CHECK(spectral_norm(Matrix::diagonal(std::vector<double>{3, -4})).value == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(spectral_norm(Matrix(4, 4)).value == 0.0);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Rng rng(100 + seed);
        const Matrix w = random_uniform_matrix(10, 10, -1, 1, rng);
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(w));
        const double truth = svd.singularValues()(0);
        CHECK(std::abs(spectral_norm(w).value - truth) / truth < 1e-8);
    }
}

TEST_CASE("scale_to_spectral_radius") {
    const Matrix scaled = scale_to_spectral_radius(Matrix::identity(3), 0.9);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) CHECK(scaled(i, j) == doctest::Approx(i == j ? 0.9 : 0.0));
    CHECK_THROWS_AS(scale_to_spectral_radius(Matrix(3, 3), 0.9), UnscalableError);

    Rng rng(5);
    const Matrix w = random_uniform_matrix(50, 50, -1, 1, rng);
    const Matrix once = scale_to_spectral_radius(w, 0.9);
    const double measured = spectral_radius(once).value;
    CHECK(measured >= 0.899);
    CHECK(measured <= 0.901);
    CHECK(eigen_radius(once) == doctest::Approx(0.9).epsilon(1e-6));

    const Matrix twice = scale_to_spectral_radius(once, 0.9);
    for (std::size_t i = 0; i < once.size(); ++i) {
        if (once.data()[i] == 0.0) continue;
        CHECK(std::abs(twice.data()[i] - once.data()[i]) / std::abs(once.data()[i]) < 1e-9);
    }
}

TEST_CASE("cholesky and ridge against an LU solve of the normal equations") {
    Rng rng(3);
    const Matrix x = random_uniform_matrix(50, 11, -1, 1, rng);
    const Matrix y = random_uniform_matrix(50, 2, -1, 1, rng);
    for (double lambda : {0.0, 1e-3, 1.0}) {
        const Matrix b = ridge_regression(x, y, lambda);
        const Eigen::MatrixXd ex = to_eigen(x);
        const Eigen::MatrixXd gram =
            ex.transpose() * ex + lambda * Eigen::MatrixXd::Identity(ex.cols(), ex.cols());
        const Eigen::MatrixXd truth = gram.partialPivLu().solve(ex.transpose() * to_eigen(y));
        for (std::size_t r = 0; r < b.rows(); ++r)
            for (std::size_t c = 0; c < b.cols(); ++c) CHECK(std::abs(b(r, c) - truth(r, c)) < 1e-8);
    }
    const Matrix singular(3, 3, std::vector<double>{1, 1, 0, 1, 1, 0, 0, 0, 1});
    CHECK_THROWS_AS(cholesky_solve(singular, Matrix::identity(3)), SolverError);
    CHECK_THROWS_AS(ridge_regression(Matrix(5, 2, 1.0), Matrix(5, 1, 1.0), 0.0), SolverError);
}

TEST_CASE("rng streams") {
    Rng a(42, 3);
    Rng b(42, 3);
    Rng c(42, 4);
    bool differs = false;
    for (int i = 0; i < 16; ++i) {
        const std::uint64_t x = a.next_u64();
        CHECK(x == b.next_u64());
        differs = differs || x != c.next_u64();
    }
    CHECK(differs);
    Rng d(9);
    for (int i = 0; i < 1000; ++i) {
        const double u = d.uniform(-2.0, 3.0);
        CHECK(u >= -2.0);
        CHECK(u < 3.0);
    }
    CHECK(Rng(1).split(5).next_u64() == Rng(1).split(5).next_u64());
    CHECK(Rng(1).split(5).next_u64() != Rng(1).split(6).next_u64());
}
