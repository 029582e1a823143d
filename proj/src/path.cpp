#include "path.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace patchlam {

namespace {

constexpr double kBreakMergeTol = 1e-15;

struct GaussLegendre32 {
    std::array<double, 32> node;    // on [-1, 1]
    std::array<double, 32> weight;

    GaussLegendre32() {
        // Newton iteration on P_32; nodes symmetric about 0.
        constexpr int n = 32;
        for (int i = 0; i < n / 2; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            node[i] = -x;
            node[n - 1 - i] = x;
            const double w = 2.0 / ((1.0 - x * x) * dp * dp);
            weight[i] = w;
            weight[n - 1 - i] = w;
        }
    }
};

const GaussLegendre32& gl32() {
    static const GaussLegendre32 table;
    return table;
}

long long gcd_ll(long long a, long long b) {
    while (b != 0) {
        const long long t = a % b;
        a = b;
        b = t;
    }
    return a < 0 ? -a : a;
}

}  // namespace

std::string Rational::str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

Rational Rational::parse(const std::string& text) {
    const auto slash = text.find('/');
    Rational r;
    if (slash != std::string::npos) {
        size_t used = 0;
        r.num = std::stoll(text.substr(0, slash), &used);
        const std::string den_text = text.substr(slash + 1);
        r.den = std::stoll(den_text, &used);
        if (r.den <= 0) throw ParseError("rational '" + text + "' has non-positive denominator");
    } else {
        // Decimal: scale by a power of ten.
        const double v = std::stod(text);
        const auto dot = text.find('.');
        if (dot == std::string::npos) {
            r.num = std::llround(v);
            r.den = 1;
        } else {
            const int digits = static_cast<int>(text.size() - dot - 1);
            long long den = 1;
            for (int i = 0; i < digits && i < 18; ++i) den *= 10;
            r.num = std::llround(v * static_cast<double>(den));
            r.den = den;
        }
    }
    const long long g = gcd_ll(r.num == 0 ? r.den : r.num, r.den);
    if (g > 1) {
        r.num /= g;
        r.den /= g;
    }
    return r;
}

PiecewiseMatrixPath::PiecewiseMatrixPath(int dim, std::vector<double> breakpoints,
                                         std::vector<Segment> segments)
    : dim_(dim), breaks_(std::move(breakpoints)), segments_(std::move(segments)) {
    if (dim_ < 1) throw ParseError("path dimension must be >= 1");
    if (breaks_.empty() || breaks_.size() != segments_.size())
        throw ParseError("path needs one breakpoint per segment");
    if (breaks_.front() != 0.0) throw ParseError("first breakpoint must be 0");
    for (size_t k = 0; k + 1 < breaks_.size(); ++k)
        if (!(breaks_[k] < breaks_[k + 1]))
            throw ParseError("breakpoints must be strictly increasing");
    if (breaks_.back() >= 1.0) throw ParseError("breakpoints must lie in [0,1)");
    for (const auto& seg : segments_) {
        if (const auto* m = std::get_if<Matrix>(&seg.eval)) {
            if (m->rows() != dim_ || m->cols() != dim_)
                throw ParseError("segment matrix dimension mismatch");
            if (!m->allFinite()) throw ParseError("segment matrix has non-finite entries");
        }
    }
}

PiecewiseMatrixPath PiecewiseMatrixPath::constant(Matrix m) {
    const int n = static_cast<int>(m.rows());
    std::vector<Segment> segs;
    segs.push_back(Segment{std::move(m), std::nullopt});
    return PiecewiseMatrixPath(n, {0.0}, std::move(segs));
}

PiecewiseMatrixPath PiecewiseMatrixPath::piecewise_constant(std::vector<double> breakpoints,
                                                            std::vector<Matrix> matrices) {
    if (matrices.empty()) throw ParseError("path needs at least one segment");
    const int n = static_cast<int>(matrices.front().rows());
    std::vector<Segment> segs;
    segs.reserve(matrices.size());
    for (auto& m : matrices) segs.push_back(Segment{std::move(m), std::nullopt});
    return PiecewiseMatrixPath(n, std::move(breakpoints), std::move(segs));
}

double PiecewiseMatrixPath::segment_end(int k) const {
    const size_t idx = static_cast<size_t>(k);
    return idx + 1 < breaks_.size() ? breaks_[idx + 1] : 1.0;
}

bool PiecewiseMatrixPath::segment_is_constant(int k) const {
    return std::holds_alternative<Matrix>(segments_[static_cast<size_t>(k)].eval);
}

const Matrix& PiecewiseMatrixPath::segment_matrix(int k) const {
    return std::get<Matrix>(segments_[static_cast<size_t>(k)].eval);
}

int PiecewiseMatrixPath::segment_index(double tau) const {
    tau -= std::floor(tau);  // wrap into [0,1)
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), tau);
    return static_cast<int>(std::distance(breaks_.begin(), it)) - 1;
}

Matrix PiecewiseMatrixPath::at(double tau) const {
    tau -= std::floor(tau);
    const auto& seg = segments_[static_cast<size_t>(segment_index(tau))];
    if (const auto* m = std::get_if<Matrix>(&seg.eval)) return *m;
    return std::get<MatrixFn>(seg.eval)(tau);
}

Matrix PiecewiseMatrixPath::left_limit(double tau) const {
    tau -= std::floor(tau);
    if (tau == 0.0) tau = 1.0;  // wrap: the limit from below at 0 is the limit at 1
    // Find the segment whose half-open interval has tau as its right end or
    // interior point.
    int k = segment_count() - 1;
    for (int i = 0; i < segment_count(); ++i) {
        if (tau > segment_begin(i) && tau <= segment_end(i)) {
            k = i;
            break;
        }
    }
    const auto& seg = segments_[static_cast<size_t>(k)];
    if (const auto* m = std::get_if<Matrix>(&seg.eval)) return *m;
    // Approach from below; Smooth segments are continuous on the closure by
    // contract, so evaluating just inside is adequate.
    const double eps = 1e-12 * std::max(1.0, std::abs(tau));
    return std::get<MatrixFn>(seg.eval)(std::max(segment_begin(k), tau - eps));
}

Matrix PiecewiseMatrixPath::average() const {
    Matrix acc = Matrix::Zero(dim_, dim_);
    for (int k = 0; k < segment_count(); ++k) {
        const double a = segment_begin(k), b = segment_end(k);
        if (segment_is_constant(k)) {
            acc += (b - a) * segment_matrix(k);
        } else {
            const auto& fn = std::get<MatrixFn>(segments_[static_cast<size_t>(k)].eval);
            const auto& q = gl32();
            for (int i = 0; i < 32; ++i) {
                const double tau = 0.5 * (a + b) + 0.5 * (b - a) * q.node[i];
                acc += 0.5 * (b - a) * q.weight[i] * fn(tau);
            }
        }
    }
    return acc;
}

bool PiecewiseMatrixPath::all_constant() const {
    for (int k = 0; k < segment_count(); ++k)
        if (!segment_is_constant(k)) return false;
    return true;
}

namespace {

void validate_growth_sample(const Matrix& m, const std::string& where) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) != 0.0)
                throw ParseError(where + ": growth sample has a nonzero off-diagonal entry at (" +
                                 std::to_string(i) + "," + std::to_string(j) + ")");
}

void validate_migration_sample(const Matrix& m, const std::string& where) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) < 0.0)
                throw ParseError(where + ": migration sample has a negative off-diagonal entry at (" +
                                 std::to_string(i) + "," + std::to_string(j) + ")");
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double s = m.col(j).sum();
        if (std::abs(s) > 1e-12)
            throw ParseError(where + ": migration column " + std::to_string(j) + " sums to " +
                             std::to_string(s) + " (expected 0)");
    }
}

void validate_path(const PiecewiseMatrixPath& path, bool growth, const std::string& label) {
    for (int k = 0; k < path.segment_count(); ++k) {
        const std::string where = label + " segment " + std::to_string(k);
        if (path.segment_is_constant(k)) {
            if (growth) validate_growth_sample(path.segment_matrix(k), where);
            else validate_migration_sample(path.segment_matrix(k), where);
        } else {
            // Spot-check smooth segments at a handful of interior points.
            const double a = path.segment_begin(k), b = path.segment_end(k);
            for (int s = 0; s < 7; ++s) {
                const double tau = a + (b - a) * (s + 0.5) / 7.0;
                if (growth) validate_growth_sample(path.at(tau), where);
                else validate_migration_sample(path.at(tau), where);
            }
        }
    }
}

}  // namespace

PatchModel make_patch_model(PiecewiseMatrixPath growth, PiecewiseMatrixPath migration,
                            std::string name, std::string description) {
    if (growth.dim() != migration.dim())
        throw ParseError("growth and migration dimension mismatch (" +
                         std::to_string(growth.dim()) + " vs " + std::to_string(migration.dim()) +
                         ")");
    validate_path(growth, /*growth=*/true, "growth");
    validate_path(migration, /*growth=*/false, "migration");
    return PatchModel{std::move(growth), std::move(migration), std::move(name),
                      std::move(description), {}, {}};
}

CombinedPath::CombinedPath(const PiecewiseMatrixPath& growth, const PiecewiseMatrixPath& migration)
    : dim_(growth.dim()), growth_(&growth), migration_(&migration) {
    if (growth.dim() != migration.dim())
        throw ParseError("merge_breakpoints: dimension mismatch");
    std::vector<double> merged = growth.breakpoints();
    merged.insert(merged.end(), migration.breakpoints().begin(), migration.breakpoints().end());
    std::sort(merged.begin(), merged.end());
    for (double b : merged)
        if (breaks_.empty() || b - breaks_.back() > kBreakMergeTol) breaks_.push_back(b);
}

bool CombinedPath::segment_is_constant(int k) const {
    const double tau = breaks_[static_cast<size_t>(k)];
    return growth_->segment_is_constant(growth_->segment_index(tau)) &&
           migration_->segment_is_constant(migration_->segment_index(tau));
}

Matrix CombinedPath::at(double tau, double m) const {
    return growth_->at(tau) + m * migration_->at(tau);
}

PiecewiseMatrixPath CombinedPath::bind(double m) const {
    std::vector<PiecewiseMatrixPath::Segment> segs;
    segs.reserve(breaks_.size());
    for (size_t k = 0; k < breaks_.size(); ++k) {
        const double tau = breaks_[k];
        const int gk = growth_->segment_index(tau);
        const int mk = migration_->segment_index(tau);
        if (growth_->segment_is_constant(gk) && migration_->segment_is_constant(mk)) {
            segs.push_back({Matrix(growth_->segment_matrix(gk) + m * migration_->segment_matrix(mk)),
                            std::nullopt});
        } else {
            const auto& gseg = growth_->segment(gk);
            const auto& mseg = migration_->segment(mk);
            std::optional<double> lip;
            if (gseg.lipschitz || mseg.lipschitz)
                lip = gseg.lipschitz.value_or(0.0) + m * mseg.lipschitz.value_or(0.0);
            // Capture the evaluators by value so the bound path owns its data.
            segs.push_back({MatrixFn([geval = gseg.eval, meval = mseg.eval, m](double t) {
                                Matrix r = std::holds_alternative<Matrix>(geval)
                                               ? std::get<Matrix>(geval)
                                               : std::get<MatrixFn>(geval)(t);
                                Matrix l = std::holds_alternative<Matrix>(meval)
                                               ? std::get<Matrix>(meval)
                                               : std::get<MatrixFn>(meval)(t);
                                return Matrix(r + m * l);
                            }),
                            lip});
        }
    }
    return PiecewiseMatrixPath(dim_, breaks_, std::move(segs));
}

CombinedPath merge_breakpoints(const PiecewiseMatrixPath& growth,
                               const PiecewiseMatrixPath& migration) {
    return CombinedPath(growth, migration);
}

PiecewiseMatrixPath bind(const PatchModel& model, const ModelParameters& params) {
    return CombinedPath(model.growth, model.migration).bind(params.m);
}

Vector mean_growth(const PatchModel& model) {
    return model.growth.average().diagonal();
}

double gauss_legendre_32(const std::function<double(double)>& f, double a, double b) {
    const auto& q = gl32();
    double acc = 0.0;
    for (int i = 0; i < 32; ++i)
        acc += 0.5 * (b - a) * q.weight[i] * f(0.5 * (a + b) + 0.5 * (b - a) * q.node[i]);
    return acc;
}

}  // namespace patchlam
