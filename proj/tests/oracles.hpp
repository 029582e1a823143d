#pragma once

// Test-only oracles, independent of the library's computation paths:
// a truncated-series matrix exponential, a fixed-step RK4 monodromy
// integrator, and random model generators.

#include <functional>
#include <random>

#include "matrix.hpp"
#include "path.hpp"

namespace patchlam::testing {

// exp(tM) by scaling + Taylor series (no Pade, no LU).
inline Matrix expm_series(const Matrix& m, double t) {
    const Eigen::Index n = m.rows();
    Matrix a = t * m;
    int halvings = 0;
    while (a.cwiseAbs().maxCoeff() > 0.25) {
        a /= 2.0;
        ++halvings;
    }
    Matrix sum = Matrix::Identity(n, n);
    Matrix term = Matrix::Identity(n, n);
    for (int k = 1; k < 40; ++k) {
        term = term * a / static_cast<double>(k);
        sum += term;
        if (term.cwiseAbs().maxCoeff() < 1e-20) break;
    }
    for (int k = 0; k < halvings; ++k) sum = sum * sum;
    return sum;
}

// Monodromy over one period by classic fixed-step RK4 on dY/dtau = T A(tau) Y,
// stepping each segment separately with step h_tau ~ step_fraction.
inline Matrix rk4_monodromy(const PiecewiseMatrixPath& path, double T,
                            double step_fraction = 1e-5) {
    const int n = path.dim();
    Matrix y = Matrix::Identity(n, n);
    for (int k = 0; k < path.segment_count(); ++k) {
        const double a = path.segment_begin(k), b = path.segment_end(k);
        const long steps = std::max(1L, std::lround((b - a) / step_fraction));
        const double h = (b - a) / static_cast<double>(steps);
        for (long s = 0; s < steps; ++s) {
            const double tau = a + h * static_cast<double>(s);
            auto f = [&](double x, const Matrix& yy) -> Matrix {
                if (x >= b) x = std::nextafter(b, a);
                return T * (path.at(x) * yy);
            };
            const Matrix k1 = f(tau, y);
            const Matrix k2 = f(tau + 0.5 * h, Matrix(y + 0.5 * h * k1));
            const Matrix k3 = f(tau + 0.5 * h, Matrix(y + 0.5 * h * k2));
            const Matrix k4 = f(tau + h, Matrix(y + h * k3));
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return y;
}

// Random Metzler matrix with moderate entries.
inline Matrix random_metzler(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> off(0.0, 1.0);
    std::uniform_real_distribution<double> diag(-2.0, 1.0);
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = i == j ? diag(rng) : off(rng);
    return m;
}

// Random migration matrix: nonnegative off-diagonals (half of them zero,
// the rest bounded away from zero), columns summing to zero exactly.
inline Matrix random_migration(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Matrix l = Matrix::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        double col = 0.0;
        for (int i = 0; i < n; ++i) {
            if (i == j) continue;
            const double v = u(rng) < 0.5 ? 0.0 : 0.05 + u(rng);
            l(i, j) = v;
            col += v;
        }
        l(j, j) = col == 0.0 ? 0.0 : -col;
    }
    return l;
}

// Random piecewise-constant patch model with an irreducible averaged
// migration matrix (rejection sampling).
inline PatchModel random_model(int n, int segments, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> growth(-2.0, 2.0);
    for (int attempt = 0; attempt < 200; ++attempt) {
        std::vector<double> breaks{0.0};
        std::uniform_real_distribution<double> u(0.05, 0.95);
        std::vector<double> cuts;
        for (int k = 1; k < segments; ++k) cuts.push_back(u(rng));
        std::sort(cuts.begin(), cuts.end());
        bool ok = true;
        for (size_t k = 0; k < cuts.size(); ++k) {
            if (cuts[k] - breaks.back() < 0.05) ok = false;
            breaks.push_back(cuts[k]);
        }
        if (!ok) continue;

        std::vector<Matrix> r, l;
        for (int k = 0; k < segments; ++k) {
            Matrix g = Matrix::Zero(n, n);
            for (int i = 0; i < n; ++i) g(i, i) = growth(rng);
            r.push_back(std::move(g));
            l.push_back(random_migration(n, rng));
        }
        PatchModel model = make_patch_model(
            PiecewiseMatrixPath::piecewise_constant(breaks, std::move(r)),
            PiecewiseMatrixPath::piecewise_constant(breaks, std::move(l)), "random");
        if (is_irreducible(model.migration.average(), 1e-12)) return model;
    }
    throw std::runtime_error("random_model: rejection sampling failed");
}

}  // namespace patchlam::testing
