#pragma once

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "matrix.hpp"

// 1-periodic piecewise-continuous matrix paths on [0,1) and the patch models
// A(tau) = R(tau) + m L(tau) built from them. Segments live on half-open
// intervals [tau_k, tau_{k+1}); evaluation is right-continuous and left
// limits are exposed separately.

namespace patchlam {

class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Exact rational in [0,1), kept so model files can round-trip breakpoints
// like 1/3 without decimal noise.
struct Rational {
    long long num = 0;
    long long den = 1;

    double value() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const;
    static Rational parse(const std::string& text);  // "p/q" or decimal
    friend bool operator==(const Rational&, const Rational&) = default;
};

using MatrixFn = std::function<Matrix(double)>;

class PiecewiseMatrixPath {
public:
    struct Segment {
        std::variant<Matrix, MatrixFn> eval;  // Constant or Smooth
        std::optional<double> lipschitz;      // optional step-control hint for Smooth
    };

    // breakpoints: 0 = tau_0 < tau_1 < ... < tau_N < 1, one per segment.
    PiecewiseMatrixPath(int dim, std::vector<double> breakpoints, std::vector<Segment> segments);

    static PiecewiseMatrixPath constant(Matrix m);
    static PiecewiseMatrixPath piecewise_constant(std::vector<double> breakpoints,
                                                  std::vector<Matrix> matrices);

    int dim() const { return dim_; }
    int segment_count() const { return static_cast<int>(segments_.size()); }
    const std::vector<double>& breakpoints() const { return breaks_; }
    double segment_begin(int k) const { return breaks_[static_cast<size_t>(k)]; }
    double segment_end(int k) const;
    bool segment_is_constant(int k) const;
    const Matrix& segment_matrix(int k) const;  // Constant segments only
    const Segment& segment(int k) const { return segments_[static_cast<size_t>(k)]; }

    int segment_index(double tau) const;  // tau wrapped into [0,1)
    Matrix at(double tau) const;          // right-continuous value
    Matrix left_limit(double tau) const;  // limit from below; tau=0 wraps to 1

    // Integral over one period: exact length-weighted sum for Constant
    // segments, 32-point Gauss-Legendre per Smooth segment.
    Matrix average() const;

    bool all_constant() const;

private:
    int dim_;
    std::vector<double> breaks_;
    std::vector<Segment> segments_;
};

// A growth path (diagonal samples) plus a migration path (Metzler samples
// whose columns sum to zero). The two paths may use different breakpoints.
struct PatchModel {
    PiecewiseMatrixPath growth;
    PiecewiseMatrixPath migration;
    std::string name;
    std::string description;
    // Exact breakpoint forms when known (from a file or the catalog),
    // parallel to growth.breakpoints() and migration.breakpoints().
    std::vector<Rational> growth_breaks_exact;
    std::vector<Rational> migration_breaks_exact;

    int dim() const { return growth.dim(); }
};

struct ModelParameters {
    double m = 1.0;  // migration strength, >= 0
    double T = 1.0;  // period, > 0
};

// Validates and assembles a PatchModel; throws ParseError naming the first
// violated invariant. Smooth segments are checked by sampling.
PatchModel make_patch_model(PiecewiseMatrixPath growth, PiecewiseMatrixPath migration,
                            std::string name = {}, std::string description = {});

// The union-breakpoint combination tau -> R(tau) + m L(tau) with the
// migration strength left unbound.
class CombinedPath {
public:
    CombinedPath(const PiecewiseMatrixPath& growth, const PiecewiseMatrixPath& migration);

    int dim() const { return dim_; }
    const std::vector<double>& breakpoints() const { return breaks_; }
    int segment_count() const { return static_cast<int>(breaks_.size()); }
    bool segment_is_constant(int k) const;

    Matrix at(double tau, double m) const;
    PiecewiseMatrixPath bind(double m) const;

private:
    int dim_;
    std::vector<double> breaks_;
    const PiecewiseMatrixPath* growth_;
    const PiecewiseMatrixPath* migration_;
};

// Spec-level operations.
CombinedPath merge_breakpoints(const PiecewiseMatrixPath& growth,
                               const PiecewiseMatrixPath& migration);
PiecewiseMatrixPath bind(const PatchModel& model, const ModelParameters& params);

// Per-patch mean growth rates, i.e. the diagonal of the averaged growth path.
Vector mean_growth(const PatchModel& model);

// 32-point Gauss-Legendre quadrature of f over [a, b].
double gauss_legendre_32(const std::function<double(double)>& f, double a, double b);

}  // namespace patchlam
