#pragma once

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>

// Dense linear algebra for small Metzler / nonnegative matrices.
//
// Index convention used throughout the library: entry (i,j) of a matrix is
// the flow into patch i from patch j, so column sums carry the per-patch
// growth rates.

namespace patchlam {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Thrown when an eigensolver or integrator cannot deliver the requested
// accuracy, or when a result would overflow double precision.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Thrown when one of the model hypotheses needed by an operation fails
// (typically irreducibility of the averaged migration matrix).
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SpectralResult {
    double lambda_max = 0.0;            // spectral abscissa; real for Metzler input
    std::optional<Vector> eigvec;       // nonnegative, simplex-normalized, when available
    bool simple = false;                // dominant eigenvalue simple within the gap tolerance
    double gap = 0.0;                   // lambda_max minus the next-largest real part
};

struct PerronResult {
    double mu = 0.0;                    // Perron-Frobenius root, > 0
    Vector pi;                          // positive simplex-normalized eigenvector
};

// Relative gap below which the dominant eigenvalue is reported as non-simple.
inline constexpr double kSimplicityGapTol = 1e-9;

bool is_metzler(const Matrix& m);

// Strong connectivity of the digraph with an edge j -> i iff m(i,j) > threshold
// for i != j, decided by transitive closure. Supply threshold 0 for exact user
// data and ~1e-12 for matrices produced by quadrature.
bool is_irreducible(const Matrix& m, double threshold = 0.0);

// Full dense eigendecomposition of a Metzler matrix (computed on m + rI with
// r = 1 + max|diag| and shifted back). When the dominant eigenvalue is not
// simple, eigvec is the projection of the uniform vector onto the dominant
// eigenspace if that projection is nonnegative, and absent otherwise.
SpectralResult spectral_abscissa(const Matrix& m);

// Dominant eigenvalue and positive simplex eigenvector of an irreducible
// nonnegative matrix. Throws std::invalid_argument on reducible input.
PerronResult perron_root(const Matrix& n);

// exp(t*m) by scaling-and-squaring with a Pade(13) core. exp(0*m) == I
// exactly. Throws NumericError instead of returning non-finite entries.
Matrix matrix_exponential(const Matrix& m, double t);

}  // namespace patchlam
