#include "matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace patchlam {

namespace {

// Clip round-off negatives and renormalize onto the unit simplex.
// Returns nullopt when the vector has a genuinely negative component or a
// non-positive sum.
std::optional<Vector> to_simplex(Vector v, double neg_tol) {
    // Orient so the dominant mass is positive (eigenvectors carry an
    // arbitrary sign).
    double pos = 0.0, neg = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] > 0) pos += v[i];
        else neg -= v[i];
    }
    if (neg > pos) v = -v;
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale <= 0.0) return std::nullopt;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v[i] < 0.0) {
            if (v[i] < -neg_tol * scale) return std::nullopt;
            v[i] = 0.0;
        }
    }
    const double sum = v.sum();
    if (sum <= 0.0) return std::nullopt;
    Vector out = v / sum;
    for (Eigen::Index i = 0; i < out.size(); ++i)
        if (out[i] == 0.0) out[i] = 0.0;  // drop negative-zero signs
    return out;
}

}  // namespace

bool is_metzler(const Matrix& m) {
    const Eigen::Index n = m.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && m(i, j) < 0.0) return false;
    return true;
}

bool is_irreducible(const Matrix& m, double threshold) {
    const int n = static_cast<int>(m.rows());
    if (n <= 1) return true;
    // reach(i,j): a directed path j -> ... -> i exists.
    std::vector<char> reach(static_cast<size_t>(n) * n, 0);
    auto at = [&](int i, int j) -> char& { return reach[static_cast<size_t>(i) * n + j]; };
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            at(i, j) = (i == j) || m(i, j) > threshold;
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (at(i, k) && at(k, j)) at(i, j) = 1;
    return std::all_of(reach.begin(), reach.end(), [](char c) { return c != 0; });
}

namespace {

// Osborne balancing with radix-2 scales (exact in floating point). Monodromy
// matrices of strongly seasonal models are badly non-normal -- entries many
// orders of magnitude above the spectral radius -- and an unbalanced QR
// eigensolve then drowns the Perron root in eps*||X|| noise.
Vector balance_in_place(Matrix& a) {
    const Eigen::Index n = a.rows();
    Vector d = Vector::Ones(n);
    constexpr double radix = 2.0;
    bool done = false;
    for (int pass = 0; pass < 200 && !done; ++pass) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                r += std::abs(a(i, j));
                c += std::abs(a(j, i));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            double f = 1.0, g = r / radix;
            while (c < g) {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= radix * radix;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                d[i] *= f;
                a.row(i) /= f;
                a.col(i) *= f;
            }
        }
    }
    return d;
}

}  // namespace

SpectralResult spectral_abscissa(const Matrix& m) {
    const Eigen::Index n = m.rows();
    SpectralResult out;
    if (n == 1) {
        out.lambda_max = m(0, 0);
        out.eigvec = Vector::Ones(1);
        out.simple = true;
        out.gap = std::numeric_limits<double>::infinity();
        return out;
    }

    // Shift so the matrix handed to the solver is nonnegative for Metzler
    // input; eigenvalues shift back exactly. Balance before solving.
    const double shift = 1.0 + m.diagonal().cwiseAbs().maxCoeff();
    Matrix balanced = m + shift * Matrix::Identity(n, n);
    const Vector scales = balance_in_place(balanced);
    Eigen::EigenSolver<Matrix> solver(balanced);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigensolver did not converge on a " + std::to_string(n) + "x" +
                           std::to_string(n) + " matrix");

    const auto& ev = solver.eigenvalues();
    std::vector<Eigen::Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return ev[a].real() > ev[b].real(); });

    const Eigen::Index top = order[0];
    out.lambda_max = ev[top].real() - shift;
    out.gap = ev[top].real() - ev[order[1]].real();

    const double tol = kSimplicityGapTol * (1.0 + std::abs(out.lambda_max));
    out.simple = out.gap > tol;

    if (out.simple) {
        // De-balance: eigenvectors of D^-1 A D map back through D.
        Vector v = scales.asDiagonal() * solver.eigenvectors().col(top).real();
        out.eigvec = to_simplex(std::move(v), 1e-8);
        return out;
    }

    // Non-simple dominant eigenvalue: project the uniform vector onto the
    // span of the (essentially real) dominant eigenvectors; keep the result
    // only if it lands in the nonnegative cone.
    std::vector<Eigen::Index> dominant;
    for (Eigen::Index k : order) {
        if (ev[top].real() - ev[k].real() > tol) break;
        if (std::abs(ev[k].imag()) <= tol) dominant.push_back(k);
    }
    if (dominant.empty()) return out;
    Matrix basis(n, static_cast<Eigen::Index>(dominant.size()));
    for (size_t c = 0; c < dominant.size(); ++c) {
        Vector v = scales.asDiagonal() * solver.eigenvectors().col(dominant[c]).real();
        const double norm = v.norm();
        basis.col(static_cast<Eigen::Index>(c)) = norm > 0 ? Vector(v / norm) : v;
    }
    Eigen::HouseholderQR<Matrix> qr(basis);
    Matrix q = qr.householderQ() * Matrix::Identity(n, static_cast<Eigen::Index>(dominant.size()));
    const Vector uniform = Vector::Constant(n, 1.0 / static_cast<double>(n));
    Vector projected = q * (q.transpose() * uniform);
    if (auto vec = to_simplex(projected, 1e-9)) out.eigvec = *vec;
    return out;
}

PerronResult perron_root(const Matrix& n) {
    const Eigen::Index dim = n.rows();
    const double scale = std::max(1.0, n.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < dim; ++i)
        for (Eigen::Index j = 0; j < dim; ++j)
            if (n(i, j) < -1e-9 * scale)
                throw std::invalid_argument("perron_root requires a nonnegative matrix");
    if (!is_irreducible(n))
        throw std::invalid_argument("perron_root requires irreducible nonnegative matrix");

    SpectralResult s = spectral_abscissa(n);
    if (!s.eigvec)
        throw NumericError("Perron vector could not be extracted (dominant eigenvalue nearly "
                           "degenerate, gap " + std::to_string(s.gap) + ")");
    PerronResult out;
    out.mu = s.lambda_max;
    out.pi = *s.eigvec;
    return out;
}

Matrix matrix_exponential(const Matrix& m, double t) {
    if (!std::isfinite(t)) throw std::invalid_argument("matrix_exponential: t must be finite");
    const Eigen::Index n = m.rows();
    Matrix a = t * m;
    if (!a.allFinite())
        throw NumericError("matrix_exponential: t*M has non-finite entries; rescale the model");

    // Higham's degree-13 Pade with scaling and squaring.
    static const double pade_coeff[] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
        129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
        1323241920.0,        40840800.0,          960960.0,           16380.0,
        182.0,               1.0};
    constexpr double theta13 = 5.371920351148152;

    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 == 0.0) return Matrix::Identity(n, n);  // exp(0) = I exactly
    int squarings = 0;
    if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        if (squarings > 100)
            throw NumericError("matrix_exponential: t*||M|| too large (" + std::to_string(norm1) +
                               "); result would overflow");
        a /= std::pow(2.0, squarings);
    }

    const Matrix ident = Matrix::Identity(n, n);
    const Matrix a2 = a * a;
    const Matrix a4 = a2 * a2;
    const Matrix a6 = a4 * a2;
    const Matrix u = a * (a6 * (pade_coeff[13] * a6 + pade_coeff[11] * a4 + pade_coeff[9] * a2) +
                          pade_coeff[7] * a6 + pade_coeff[5] * a4 + pade_coeff[3] * a2 +
                          pade_coeff[1] * ident);
    const Matrix v = a6 * (pade_coeff[12] * a6 + pade_coeff[10] * a4 + pade_coeff[8] * a2) +
                     pade_coeff[6] * a6 + pade_coeff[4] * a4 + pade_coeff[2] * a2 +
                     pade_coeff[0] * ident;
    Matrix f = (v - u).partialPivLu().solve(v + u);

    // Entries of exp(tM) outside the reachability closure of M's sparsity
    // pattern are exactly zero (every term of the power series is), but the
    // pivoted Pade solve leaves eps-size residue there. That residue acts as
    // a spurious coupling once products of propagators span many decades, so
    // restore the exact zeros; squaring then preserves the pattern.
    {
        std::vector<char> reach(static_cast<size_t>(n) * n, 0);
        auto at = [&](Eigen::Index i, Eigen::Index j) -> char& {
            return reach[static_cast<size_t>(i) * n + j];
        };
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) at(i, j) = (i == j) || m(i, j) != 0.0;
        for (Eigen::Index k = 0; k < n; ++k)
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < n; ++j)
                    if (at(i, k) && at(k, j)) at(i, j) = 1;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (!at(i, j)) f(i, j) = 0.0;
    }

    for (int s = 0; s < squarings; ++s) {
        f = f * f;
        if (!f.allFinite())
            throw NumericError("matrix_exponential: overflow while squaring; rescale the model");
    }
    if (!f.allFinite()) throw NumericError("matrix_exponential: non-finite result");
    return f;
}

}  // namespace patchlam
