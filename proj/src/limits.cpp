#include "limits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace patchlam {

namespace {

constexpr int kCrossingScanSamples = 257;
constexpr int kCrossingCapPerSegment = 1024;

// Zeros of f on [a, b] located by scanning for sign changes and bisecting to
// 1e-12. Throws when the count cap is exceeded.
std::vector<double> sign_change_points(const std::function<double(double)>& f, double a, double b,
                                       const char* what) {
    std::vector<double> out;
    double prev_t = a;
    double prev_v = f(a);
    for (int s = 1; s <= kCrossingScanSamples; ++s) {
        const double t = a + (b - a) * s / kCrossingScanSamples;
        const double v = f(t);
        if ((prev_v < 0.0) != (v < 0.0)) {
            double lo = prev_t, hi = t, flo = prev_v;
            while (hi - lo > 1e-12) {
                const double mid = 0.5 * (lo + hi);
                const double fm = f(mid);
                if ((flo < 0.0) != (fm < 0.0)) hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
            }
            out.push_back(0.5 * (lo + hi));
            if (out.size() > kCrossingCapPerSegment)
                throw NumericError(std::string(what) +
                                   ": more than 1024 crossings in one segment; the finite-"
                                   "crossing restriction is violated (rapid oscillations)");
        }
        prev_t = t;
        prev_v = v;
    }
    return out;
}

// Subdivision of [a, b] at the crossing points of all pairwise differences of
// the diagonal growth rates.
std::vector<double> growth_crossing_subdivision(const PiecewiseMatrixPath& growth, int seg) {
    const double a = growth.segment_begin(seg), b = growth.segment_end(seg);
    std::vector<double> pts{a, b};
    const int n = growth.dim();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            auto diff = [&](double tau) {
                const Matrix r = growth.at(tau);
                return r(i, i) - r(j, j);
            };
            auto zeros = sign_change_points(diff, a, b, "sigma_chi");
            pts.insert(pts.end(), zeros.begin(), zeros.end());
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double x, double y) { return y - x < 1e-13; }),
              pts.end());
    return pts;
}

// Subdivision of [a, b] at parameter values where the dominant eigenvalue of
// path(tau) changes branch. Every local minimum of the spectral gap is pinned
// by golden-section refinement and used as a subdivision point; minima that
// turn out not to be crossings merely add a harmless extra quadrature piece.
std::vector<double> gap_subdivision(const std::function<Matrix(double)>& at, double a, double b) {
    std::vector<double> pts{a, b};
    std::vector<double> gap(kCrossingScanSamples + 1);
    for (int s = 0; s <= kCrossingScanSamples; ++s)
        gap[static_cast<size_t>(s)] =
            spectral_abscissa(at(a + (b - a) * s / kCrossingScanSamples)).gap;
    for (int s = 1; s < kCrossingScanSamples; ++s) {
        if (!(gap[s] <= gap[s - 1] && gap[s] <= gap[s + 1])) continue;
        double lo = a + (b - a) * (s - 1) / kCrossingScanSamples;
        double hi = a + (b - a) * (s + 1) / kCrossingScanSamples;
        for (int it = 0; it < 80 && hi - lo > 1e-12; ++it) {
            const double m1 = lo + (hi - lo) * 0.381966;
            const double m2 = hi - (hi - lo) * 0.381966;
            if (spectral_abscissa(at(m1)).gap < spectral_abscissa(at(m2)).gap) hi = m2;
            else lo = m1;
        }
        pts.push_back(0.5 * (lo + hi));
        if (pts.size() > kCrossingCapPerSegment)
            throw NumericError("eigenvalue-crossing subdivision exceeded 1024 points");
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double x, double y) { return y - x < 1e-13; }),
              pts.end());
    return pts;
}

GatedValue gate(const HypothesisReport& report, std::optional<double> formula_value, bool force,
                std::string note_when_absent) {
    GatedValue out;
    out.hypothesis = report.hypothesis;
    out.verdict = report.verdict;
    if (!formula_value) {
        out.note = std::move(note_when_absent);
        return out;
    }
    if (report.verified()) {
        out.value = formula_value;
    } else if (force) {
        out.value = formula_value;
        out.forced = true;
        out.note = "formula value, hypothesis unverified";
    } else {
        out.note = report.hypothesis + " " + to_string(report.verdict) + " (" +
                   std::to_string(report.witnesses.size()) + " witness(es)); use force to "
                   "evaluate the formula anyway";
    }
    return out;
}

}  // namespace

std::pair<double, double> sigma_chi(const PiecewiseMatrixPath& growth) {
    double sigma = 0.0, chi = 0.0;
    for (int k = 0; k < growth.segment_count(); ++k) {
        const double a = growth.segment_begin(k), b = growth.segment_end(k);
        if (growth.segment_is_constant(k)) {
            const auto d = growth.segment_matrix(k).diagonal();
            sigma += (b - a) * d.minCoeff();
            chi += (b - a) * d.maxCoeff();
            continue;
        }
        const auto pts = growth_crossing_subdivision(growth, k);
        for (size_t p = 0; p + 1 < pts.size(); ++p) {
            sigma += gauss_legendre_32(
                [&](double tau) { return growth.at(tau).diagonal().minCoeff(); }, pts[p],
                pts[p + 1]);
            chi += gauss_legendre_32(
                [&](double tau) { return growth.at(tau).diagonal().maxCoeff(); }, pts[p],
                pts[p + 1]);
        }
    }
    return {sigma, chi};
}

std::pair<double, double> sigma_chi(const PatchModel& model) {
    return sigma_chi(model.growth);
}

double lambda_m_to_0(const PatchModel& model) {
    return mean_growth(model).maxCoeff();
}

double lambda_T_to_0(const PatchModel& model, double m) {
    const Matrix lbar = model.migration.average();
    if (m > 0.0 && !is_irreducible(lbar, 1e-12))
        throw HypothesisError(
            "average migration matrix reducible — growth rate may be patch-dependent");
    const Matrix avg = model.growth.average() + m * lbar;
    return spectral_abscissa(avg).lambda_max;
}

double lambda_T_to_inf_formula(const PatchModel& model, double m) {
    const CombinedPath combined = merge_breakpoints(model.growth, model.migration);
    double acc = 0.0;
    const auto& breaks = combined.breakpoints();
    for (int k = 0; k < combined.segment_count(); ++k) {
        const double a = breaks[static_cast<size_t>(k)];
        const double b = k + 1 < combined.segment_count() ? breaks[static_cast<size_t>(k) + 1] : 1.0;
        if (combined.segment_is_constant(k)) {
            acc += (b - a) * spectral_abscissa(combined.at(a, m)).lambda_max;
            continue;
        }
        auto at = [&](double tau) { return combined.at(tau, m); };
        const auto pts = gap_subdivision(at, a, b);
        for (size_t p = 0; p + 1 < pts.size(); ++p)
            acc += gauss_legendre_32(
                [&](double tau) { return spectral_abscissa(at(tau)).lambda_max; }, pts[p],
                pts[p + 1]);
    }
    return acc;
}

double lambda_m_to_inf_formula(const PatchModel& model) {
    const CombinedPath combined = merge_breakpoints(model.growth, model.migration);
    const auto& breaks = combined.breakpoints();
    double acc = 0.0;
    auto kernel_vector = [&](double tau) -> Vector {
        const SpectralResult s = spectral_abscissa(model.migration.at(tau));
        if (!s.simple || !s.eigvec)
            throw NumericError("large-m limit undefined: 0 is not a simple eigenvalue of the "
                               "migration matrix at tau=" + std::to_string(tau));
        return *s.eigvec;
    };
    for (int k = 0; k < combined.segment_count(); ++k) {
        const double a = breaks[static_cast<size_t>(k)];
        const double b = k + 1 < combined.segment_count() ? breaks[static_cast<size_t>(k) + 1] : 1.0;
        if (combined.segment_is_constant(k)) {
            const Vector p = kernel_vector(a);
            const Vector r = model.growth.at(a).diagonal();
            acc += (b - a) * p.dot(r);
            continue;
        }
        auto at = [&](double tau) { return model.migration.at(tau); };
        const auto pts = gap_subdivision(at, a, b);
        for (size_t q = 0; q + 1 < pts.size(); ++q)
            acc += gauss_legendre_32(
                [&](double tau) {
                    return kernel_vector(tau).dot(Vector(model.growth.at(tau).diagonal()));
                },
                pts[q], pts[q + 1]);
    }
    return acc;
}

CornerLimits corner_limits(const PatchModel& model) {
    CornerLimits out;
    out.lambda_00 = lambda_m_to_0(model);
    out.lambda_0inf = sigma_chi(model).second;
    const Matrix lbar = model.migration.average();
    if (!is_irreducible(lbar, 1e-12))
        throw HypothesisError(
            "average migration matrix reducible — growth rate may be patch-dependent");
    const SpectralResult s = spectral_abscissa(lbar);
    if (!s.eigvec) throw NumericError("kernel vector of the averaged migration matrix not found");
    out.lambda_inf0 = s.eigvec->dot(mean_growth(model));
    return out;
}

LimitReport limit_report(const PatchModel& model, double m, bool force,
                         const SamplingParams& params) {
    LimitReport out;
    out.m = m;
    std::tie(out.sigma, out.chi) = sigma_chi(model);
    out.lambda_0T = lambda_m_to_0(model);
    out.lambda_m0 = lambda_T_to_0(model, m);  // throws HypothesisError when H2 fails
    const CornerLimits corners = corner_limits(model);
    out.lambda_00 = corners.lambda_00;
    out.lambda_inf0 = corners.lambda_inf0;

    out.h3 = m > 0.0 ? check_h3(model, m, params) : HypothesisReport{};
    if (!(m > 0.0)) {
        out.h3.hypothesis = "H3";
        out.h3.verdict = Verdict::Inconclusive;
        out.h3.witnesses.push_back(
            {0.0, "not-checked", "H3 is only defined for m > 0", std::nullopt, true});
    }
    out.h4 = check_h4(model, params);

    std::optional<double> t_inf;
    if (m > 0.0 && (out.h3.verified() || force)) t_inf = lambda_T_to_inf_formula(model, m);
    out.lambda_mInf = gate(out.h3, t_inf, force,
                           m > 0.0 ? "" : "requires m > 0");

    std::optional<double> m_inf;
    std::string m_inf_note;
    if (out.h4.verified() || force) {
        try {
            m_inf = lambda_m_to_inf_formula(model);
        } catch (const NumericError& err) {
            m_inf_note = err.what();
        }
    }
    out.lambda_infT = gate(out.h4, m_inf, force, m_inf_note);
    out.lambda_0inf = gate(out.h3, corners.lambda_0inf, force, "");
    return out;
}

ProfileDiagnostics lambda_m0_profile(const PatchModel& model, const std::vector<double>& m_grid) {
    ProfileDiagnostics out;
    out.m = m_grid;
    out.value.reserve(m_grid.size());
    for (double m : m_grid) out.value.push_back(lambda_T_to_0(model, m));

    const Vector rbar = mean_growth(model);
    const double spread = rbar.maxCoeff() - rbar.minCoeff();
    if (spread <= 1e-12) out.constant_at = rbar.mean();

    const size_t k = m_grid.size();
    if (k >= 3) {
        for (size_t i = 1; i + 1 < k; ++i) {
            const double h_prev = m_grid[i] - m_grid[i - 1];
            const double h_next = m_grid[i + 1] - m_grid[i];
            out.first_diff.push_back((out.value[i + 1] - out.value[i - 1]) / (h_prev + h_next));
            const double slope_next = (out.value[i + 1] - out.value[i]) / h_next;
            const double slope_prev = (out.value[i] - out.value[i - 1]) / h_prev;
            out.second_diff.push_back(2.0 * (slope_next - slope_prev) / (h_prev + h_next));
        }
    }
    out.strictly_decreasing = k >= 2;
    for (size_t i = 0; i + 1 < k; ++i)
        if (!(out.value[i] - out.value[i + 1] > 1e-10)) out.strictly_decreasing = false;
    out.convex = !out.second_diff.empty();
    for (double d : out.second_diff)
        if (!(d > 1e-10)) out.convex = false;
    return out;
}

std::string LimitReport::to_text() const {
    std::ostringstream os;
    os.precision(12);
    auto gated = [&](const GatedValue& g) {
        std::ostringstream line;
        line.precision(12);
        if (g.value) {
            line << *g.value;
            if (g.forced) line << "  [" << g.note << "]";
            else line << "  [" << g.hypothesis << " " << to_string(g.verdict) << "]";
        } else {
            line << "unavailable  [" << (g.note.empty() ? g.hypothesis + " " + to_string(g.verdict)
                                                        : g.note)
                 << "]";
        }
        return line.str();
    };
    os << "sigma: " << sigma << "\n";
    os << "chi: " << chi << "\n";
    os << "lambda(0,T)   = " << lambda_0T << "\n";
    os << "lambda(m,0)   = " << lambda_m0 << "   at m=" << m << "\n";
    os << "lambda(m,inf) = " << gated(lambda_mInf) << "\n";
    os << "lambda(inf,T) = " << gated(lambda_infT) << "\n";
    os << "lambda(0,0)   = " << lambda_00 << "\n";
    os << "lambda(0,inf) = " << gated(lambda_0inf) << "\n";
    os << "lambda(inf,0) = " << lambda_inf0 << "\n";
    return os.str();
}

}  // namespace patchlam
