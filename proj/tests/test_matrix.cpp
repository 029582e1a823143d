#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "matrix.hpp"
#include "oracles.hpp"

using namespace patchlam;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

}  // namespace

TEST_CASE("is_metzler") {
    CHECK(is_metzler(mat2(-1, 1, 1, -1)));
    CHECK_FALSE(is_metzler(mat2(0, -0.1, 1, 0)));
    CHECK(is_metzler(Matrix::Identity(3, 3)));
}

TEST_CASE("is_irreducible") {
    CHECK(is_irreducible(mat2(-1, 1, 1, -1)));
    CHECK_FALSE(is_irreducible(mat2(1, 1, 0, 1)));  // one-way flow
    Matrix cycle(3, 3);
    cycle << -1, 0, 1, 1, -1, 0, 0, 1, -1;
    CHECK(is_irreducible(Matrix(cycle / 3.0)));
    CHECK(is_irreducible(Matrix::Zero(1, 1)));
}

TEST_CASE("is_irreducible is invariant under simultaneous permutation") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        Matrix m = testing::random_metzler(n, rng);
        // Sparsify so both outcomes occur.
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && (rng() & 3) == 0) m(i, j) = 0.0;
        std::vector<int> perm(static_cast<size_t>(n));
        std::iota(perm.begin(), perm.end(), 0);
        std::shuffle(perm.begin(), perm.end(), rng);
        Matrix p = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) p(perm[static_cast<size_t>(i)], i) = 1.0;
        const Matrix permuted = p * m * p.transpose();
        CHECK(is_irreducible(m) == is_irreducible(permuted));
    }
}

TEST_CASE("spectral_abscissa on diagonal and the seasonal examples") {
    {
        Matrix d = Matrix::Zero(2, 2);
        d(0, 0) = -0.5;
        d(1, 1) = 0.5;
        const SpectralResult s = spectral_abscissa(d);
        CHECK(s.lambda_max == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(s.simple);
        REQUIRE(s.eigvec);
        CHECK((*s.eigvec)[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK((*s.eigvec)[1] == doctest::Approx(1.0).epsilon(1e-12));
    }
    {
        // Best/worst symmetric pair at a=1, b=-1, m=1.
        Matrix a1(3, 3);
        a1 << 0, 1, 0, 1, -2, 0, 0, 0, -1;
        const SpectralResult s = spectral_abscissa(a1);
        CHECK(s.lambda_max == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-13));
        CHECK(s.simple);
    }
    {
        Matrix a1(3, 3);
        a1 << -2, 1, 0, 1, -2, 0, 0, 0, 1;
        const SpectralResult s = spectral_abscissa(a1);
        CHECK(s.lambda_max == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(s.simple);
        CHECK(s.gap == doctest::Approx(2.0).epsilon(1e-12));
        REQUIRE(s.eigvec);
        CHECK((*s.eigvec - Vector(Vector::Unit(3, 2))).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("spectral_abscissa reports non-simple kernels with a canonical vector") {
    Matrix l1(3, 3);
    l1 << -1, 1, 0, 1, -1, 0, 0, 0, 0;  // eigenvalues 0, 0, -2
    const SpectralResult s = spectral_abscissa(l1);
    CHECK(s.lambda_max == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(s.simple);
    CHECK(s.gap < 1e-12);
    REQUIRE(s.eigvec);  // uniform vector lies in the kernel here
    for (int i = 0; i < 3; ++i) CHECK((*s.eigvec)[i] == doctest::Approx(1.0 / 3).epsilon(1e-10));
}

TEST_CASE("spectral abscissa shift equivariance") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> shift(-3.0, 3.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const Matrix m = testing::random_metzler(n, rng);
        const double c = shift(rng);
        const double base = spectral_abscissa(m).lambda_max;
        const double shifted =
            spectral_abscissa(Matrix(m + c * Matrix::Identity(n, n))).lambda_max;
        CHECK(std::abs(shifted - base - c) < 1e-10);
    }
}

TEST_CASE("perron_root") {
    {
        const PerronResult p = perron_root(mat2(0, 1, 1, 0));
        CHECK(p.mu == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(p.pi[0] == doctest::Approx(0.5).epsilon(1e-12));
    }
    {
        // Closed-form 2x2 quadratic.
        const double a = 2, d = 1, b = 1e-4;
        const PerronResult p = perron_root(mat2(a, b, b, d));
        const double mu = 0.5 * (a + d + std::sqrt((a - d) * (a - d) + 4 * b * b));
        CHECK(p.mu == doctest::Approx(mu).epsilon(1e-14));
        CHECK(p.pi[0] == doctest::Approx(0.9999).epsilon(1e-3));
        CHECK(p.pi[1] == doctest::Approx(1e-4).epsilon(1e-2));
    }
    CHECK_THROWS_AS(perron_root(mat2(1, 1, 0, 1)), std::invalid_argument);
    {
        // 1-patch monodromy of r(t) = c.
        Matrix x(1, 1);
        x << std::exp(0.3);
        const PerronResult p = perron_root(x);
        CHECK(p.mu == doctest::Approx(std::exp(0.3)));
        CHECK(p.pi[0] == 1.0);
    }
}

TEST_CASE("perron pair satisfies N pi = mu pi") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        Matrix m = testing::random_metzler(n, rng).cwiseAbs();
        if (!is_irreducible(m)) continue;
        const PerronResult p = perron_root(m);
        const Vector lhs = m * p.pi;
        for (int i = 0; i < n; ++i)
            CHECK(lhs[i] == doctest::Approx(p.mu * p.pi[i]).epsilon(1e-9));
    }
}

TEST_CASE("matrix_exponential basics") {
    CHECK((matrix_exponential(Matrix::Zero(3, 3), 5.0) - Matrix::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() == 0.0);
    {
        Matrix d = Matrix::Zero(2, 2);
        d(0, 0) = 1;
        d(1, 1) = -1;
        const Matrix e = matrix_exponential(d, std::log(2.0));
        CHECK(e(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(e(1, 1) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(e(0, 1) == 0.0);
    }
    {
        // Symmetric coupling block: closed form and series oracle.
        const Matrix m = mat2(-1, 1, 1, -1);
        const Matrix e = matrix_exponential(m, 1.0);
        const double f = 0.5 * (1 + std::exp(-2.0));
        const double g = 0.5 * (1 - std::exp(-2.0));
        CHECK(e(0, 0) == doctest::Approx(f).epsilon(1e-14));
        CHECK(e(0, 1) == doctest::Approx(g).epsilon(1e-14));
        const Matrix series = testing::expm_series(m, 1.0);
        CHECK((e - series).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("matrix_exponential semigroup and series agreement") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> tdist(0.1, 2.0);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 3);
        const Matrix m = testing::random_metzler(n, rng);
        const double s = tdist(rng), t = tdist(rng);
        const Matrix whole = matrix_exponential(m, s + t);
        const Matrix split = matrix_exponential(m, s) * matrix_exponential(m, t);
        CHECK((whole - split).cwiseAbs().maxCoeff() < 1e-10 * whole.cwiseAbs().maxCoeff() + 1e-10);
        const Matrix series = testing::expm_series(m, t);
        const Matrix pade = matrix_exponential(m, t);
        CHECK((series - pade).cwiseAbs().maxCoeff() < 1e-12 * series.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("propagator of a Metzler matrix is nonnegative") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> tdist(0.0, 3.0);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 4);
        const Matrix e = matrix_exponential(testing::random_metzler(n, rng), tdist(rng));
        CHECK(e.minCoeff() >= -1e-12);
    }
}

TEST_CASE("matrix_exponential preserves structural zeros exactly") {
    // Block-diagonal input: the cross-block entries of the exponential are
    // exactly zero however large t gets.
    Matrix m = Matrix::Zero(3, 3);
    m.topLeftCorner(2, 2) = mat2(-5, 3, 5, -3);
    m(2, 2) = 1.0;
    const Matrix e = matrix_exponential(m, 200.0);
    CHECK(e(0, 2) == 0.0);
    CHECK(e(2, 0) == 0.0);
    CHECK(e(1, 2) == 0.0);
    CHECK(e(2, 1) == 0.0);
}

TEST_CASE("matrix_exponential overflow is an error, not inf") {
    Matrix m = Matrix::Identity(2, 2);
    m(0, 1) = 1.0;
    CHECK_THROWS_AS(matrix_exponential(m, 1e4), NumericError);
}
