#include "digdid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "monodromy.hpp"

namespace patchlam {

namespace {

constexpr double kSignTol = 1e-9;  // witness threshold on Lambda
constexpr size_t kCrossingCap = 1024;

std::vector<double> pairwise_crossings(const PiecewiseMatrixPath& growth, int seg) {
    const double a = growth.segment_begin(seg), b = growth.segment_end(seg);
    std::vector<double> pts{a, b};
    const int n = growth.dim();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            double prev_t = a;
            double prev_v = growth.at(a)(i, i) - growth.at(a)(j, j);
            for (int s = 1; s <= 257; ++s) {
                const double t = a + (b - a) * s / 257.0;
                const double v = growth.at(t)(i, i) - growth.at(t)(j, j);
                if ((prev_v < 0.0) != (v < 0.0)) {
                    double lo = prev_t, hi = t, flo = prev_v;
                    while (hi - lo > 1e-12) {
                        const double mid = 0.5 * (lo + hi);
                        const double fm = growth.at(mid)(i, i) - growth.at(mid)(j, j);
                        if ((flo < 0.0) != (fm < 0.0)) hi = mid;
                        else {
                            lo = mid;
                            flo = fm;
                        }
                    }
                    pts.push_back(0.5 * (lo + hi));
                    if (pts.size() > kCrossingCap)
                        throw NumericError(
                            "minimizer_partition: more than 1024 crossings in one segment; the "
                            "finite-crossing restriction is violated (rapid oscillations)");
                }
                prev_t = t;
                prev_v = v;
            }
        }
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](double x, double y) { return y - x < 1e-13; }),
              pts.end());
    return pts;
}

int argmin_lowest_index(const Vector& r) {
    int best = 0;
    for (int i = 1; i < r.size(); ++i)
        if (r[i] < r[best]) best = i;
    return best;
}

// Lexicographically first grid witness of sign(lambda) == want_positive.
std::optional<SweepWitness> sweep_for_sign(const PatchModel& model,
                                           const std::vector<double>& m_grid,
                                           const std::vector<double>& T_grid, bool want_positive) {
    for (double m : m_grid) {
        if (!(m > 0.0)) continue;
        for (double T : T_grid) {
            const MonodromyResult r = growth_rate(model, {m, T});
            if (want_positive ? r.Lambda > kSignTol : r.Lambda < -kSignTol)
                return SweepWitness{m, T, r.Lambda};
        }
    }
    return std::nullopt;
}

bool time_independent(const PiecewiseMatrixPath& path) {
    if (!path.all_constant()) return false;
    for (int k = 1; k < path.segment_count(); ++k)
        if (path.segment_matrix(k) != path.segment_matrix(0)) return false;
    return true;
}

}  // namespace

std::string to_string(Feasibility f) {
    switch (f) {
        case Feasibility::TheoryCertain: return "theory-certain";
        case Feasibility::FoundNumerically: return "found-numerically";
        case Feasibility::Impossible: return "impossible";
        case Feasibility::Undetermined: return "undetermined";
    }
    return "?";
}

PatchClassification classify(const PatchModel& model) {
    PatchClassification out;
    out.rbar = mean_growth(model);
    out.labels.reserve(static_cast<size_t>(out.rbar.size()));
    for (Eigen::Index i = 0; i < out.rbar.size(); ++i) {
        if (std::abs(out.rbar[i]) <= 1e-12) out.labels.push_back(PatchLabel::Neutral);
        else out.labels.push_back(out.rbar[i] < 0 ? PatchLabel::Sink : PatchLabel::Source);
    }
    std::tie(out.sigma, out.chi) = sigma_chi(model);
    return out;
}

PhenomenonResult dig_scan(const PatchModel& model, const std::vector<double>& m_grid,
                          const std::vector<double>& T_grid, const SamplingParams& params) {
    PhenomenonResult out;
    out.phenomenon = "DIG";
    const PatchClassification cls = classify(model);
    out.sigma = cls.sigma;
    out.chi = cls.chi;
    out.definition_holds = std::all_of(cls.labels.begin(), cls.labels.end(),
                                       [](PatchLabel l) { return l == PatchLabel::Sink; });
    if (!out.definition_holds)
        out.notes = "not every patch is a sink, so a positive growth rate would not be "
                    "dispersal-induced growth by definition; scanning anyway";

    if (out.chi <= 0.0) {
        out.feasible = Feasibility::Impossible;
        out.gate = "chi <= 0: the upper bound Lambda <= chi rules out positive growth";
        return out;
    }

    double smallest_m = 0.0;
    for (double m : m_grid)
        if (m > 0.0 && (smallest_m == 0.0 || m < smallest_m)) smallest_m = m;
    if (smallest_m > 0.0) {
        const HypothesisReport h3 = check_h3(model, smallest_m, params);
        out.hypothesis_verdict = h3.verdict;
    }
    out.limit_value = out.chi;  // sup over m, T of Lambda equals chi when H3 holds

    out.witness = sweep_for_sign(model, m_grid, T_grid, /*want_positive=*/true);
    if (out.hypothesis_verdict == Verdict::VerifiedSampled) {
        out.feasible = Feasibility::TheoryCertain;
        out.gate = "chi > 0 with H3 verified-sampled at m=" + std::to_string(smallest_m) +
                   ": the supremum of Lambda is chi";
    } else if (out.witness) {
        out.feasible = Feasibility::FoundNumerically;
        out.gate = "chi > 0 but H3 " + to_string(out.hypothesis_verdict) +
                   "; positive growth found by sweep";
    } else {
        out.feasible = Feasibility::Undetermined;
        out.gate = "chi > 0 but H3 " + to_string(out.hypothesis_verdict) +
                   " and the sweep found no positive growth (sweeps are incomplete)";
    }
    return out;
}

MinimizerPartition minimizer_partition(const PiecewiseMatrixPath& growth) {
    MinimizerPartition out;
    out.attains.assign(static_cast<size_t>(growth.dim()), false);
    for (int k = 0; k < growth.segment_count(); ++k) {
        if (growth.segment_is_constant(k)) {
            const int patch = argmin_lowest_index(growth.segment_matrix(k).diagonal());
            out.pieces.push_back({growth.segment_begin(k), growth.segment_end(k), patch});
            out.attains[static_cast<size_t>(patch)] = true;
            continue;
        }
        const auto pts = pairwise_crossings(growth, k);
        for (size_t p = 0; p + 1 < pts.size(); ++p) {
            const double mid = 0.5 * (pts[p] + pts[p + 1]);
            const int patch = argmin_lowest_index(growth.at(mid).diagonal());
            out.pieces.push_back({pts[p], pts[p + 1], patch});
            out.attains[static_cast<size_t>(patch)] = true;
        }
    }
    return out;
}

PiecewiseMatrixPath did_construct(const PiecewiseMatrixPath& growth, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("did_construct: epsilon must be >= 0");
    const int n = growth.dim();
    const MinimizerPartition part = minimizer_partition(growth);

    std::vector<int> missing;
    for (int i = 0; i < n; ++i)
        if (!part.attains[static_cast<size_t>(i)]) missing.push_back(i);
    if (!missing.empty() && epsilon == 0.0)
        throw std::invalid_argument(
            "did_construct: some patches never attain the minimum growth rate; a positive "
            "epsilon is required to keep the averaged migration irreducible");

    std::vector<double> breaks;
    std::vector<Matrix> mats;
    for (size_t p = 0; p < part.pieces.size(); ++p) {
        const auto& piece = part.pieces[p];
        Matrix l = Matrix::Zero(n, n);
        for (int j = 0; j < n; ++j)
            if (j != piece.patch) l(piece.patch, j) = 1.0;
        if (p == 0) {
            for (int i : missing)
                for (int j = 0; j < n; ++j)
                    if (j != i) l(i, j) = epsilon;
        }
        for (int j = 0; j < n; ++j) {
            double col = 0.0;
            for (int i = 0; i < n; ++i)
                if (i != j) col += l(i, j);
            l(j, j) = col == 0.0 ? 0.0 : -col;  // exact negation of the accumulated sum
        }
        breaks.push_back(piece.begin);
        mats.push_back(std::move(l));
    }

    PiecewiseMatrixPath migration = PiecewiseMatrixPath::piecewise_constant(breaks, mats);
    if (!is_irreducible(migration.average(), 1e-12))
        throw std::logic_error(
            "did_construct: constructed migration has a reducible average (construction bug)");
    return migration;
}

PhenomenonResult did_scan(const PiecewiseMatrixPath& growth, const std::vector<double>& m_grid,
                          const std::vector<double>& T_grid, double epsilon,
                          const PiecewiseMatrixPath* user_migration,
                          const SamplingParams& params) {
    PhenomenonResult out;
    out.phenomenon = "DID";
    std::tie(out.sigma, out.chi) = sigma_chi(growth);
    const Vector rbar = growth.average().diagonal();
    out.definition_holds = (rbar.array() > 1e-12).all();
    if (!out.definition_holds)
        out.notes = "not every patch is a source, so a negative growth rate would not be "
                    "dispersal-induced decay by definition; scanning anyway";

    if (out.sigma >= 0.0) {
        out.feasible = Feasibility::Impossible;
        out.gate = "sigma >= 0: the lower bound Lambda >= sigma rules out decay";
        return out;
    }

    if (user_migration) {
        const PatchModel model = make_patch_model(growth, *user_migration);
        if (time_independent(*user_migration)) {
            const Matrix lbar = model.migration.average();
            if (!is_irreducible(lbar, 1e-12)) {
                out.feasible = Feasibility::Undetermined;
                out.gate = "user migration is time-independent and reducible; the growth rate "
                           "may not exist";
                return out;
            }
            const SpectralResult s = spectral_abscissa(lbar);
            const double inf_value = s.eigvec->dot(rbar);
            out.limit_value = inf_value;
            if (inf_value >= 0.0) {
                out.feasible = Feasibility::Impossible;
                out.gate = "time-independent migration: the infimum of Lambda over m and T is "
                           "sum_i q_i rbar_i = " + std::to_string(inf_value) +
                           " >= 0, so decay cannot occur under this matrix";
                return out;
            }
            out.gate = "time-independent migration: infimum sum_i q_i rbar_i = " +
                       std::to_string(inf_value) + " < 0; scanning";
        } else {
            out.gate = "user-supplied time-varying migration: no theoretical gate applies; "
                       "scanning";
        }
        out.witness = sweep_for_sign(model, m_grid, T_grid, /*want_positive=*/false);
        out.feasible = out.witness ? Feasibility::FoundNumerically : Feasibility::Undetermined;
        return out;
    }

    PiecewiseMatrixPath constructed = did_construct(growth, epsilon);
    const PatchModel model = make_patch_model(growth, constructed);
    const HypothesisReport h4 = check_h4(model, params);
    out.hypothesis_verdict = h4.verdict;

    // Epsilon correction of the large-m limit, integrated over the first
    // piece for the patches that never attain the minimum.
    const MinimizerPartition part = minimizer_partition(growth);
    double correction = 0.0;
    if (epsilon > 0.0 && !part.pieces.empty()) {
        const auto& first = part.pieces.front();
        for (int i = 0; i < growth.dim(); ++i) {
            if (part.attains[static_cast<size_t>(i)]) continue;
            correction += epsilon * gauss_legendre_32(
                                        [&](double tau) { return growth.at(tau)(i, i); },
                                        first.begin, first.end);
        }
    }
    out.epsilon_correction = correction;
    out.limit_value = out.sigma + correction;
    out.constructed_migration = constructed;

    out.witness = sweep_for_sign(model, m_grid, T_grid, /*want_positive=*/false);
    if (out.sigma + correction < 0.0 && h4.verified()) {
        out.feasible = Feasibility::TheoryCertain;
        out.gate = "worst-patch migration constructed; H4 verified-sampled and the large-m "
                   "limit sigma + correction = " + std::to_string(out.sigma + correction) +
                   " is negative";
    } else if (out.witness) {
        out.feasible = Feasibility::FoundNumerically;
        out.gate = "decay found by sweep (H4 " + to_string(h4.verdict) + ")";
    } else {
        out.feasible = Feasibility::Undetermined;
        out.gate = "no decay found by sweep and the theoretical gate is not conclusive";
    }
    return out;
}

std::vector<double> log_grid(double lo, double hi, int count) {
    if (!(lo > 0.0) || !(hi > lo) || count < 2)
        throw std::invalid_argument("log_grid: need 0 < lo < hi and count >= 2");
    std::vector<double> out;
    out.reserve(static_cast<size_t>(count));
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (int i = 0; i < count; ++i)
        out.push_back(std::pow(10.0, llo + (lhi - llo) * i / (count - 1)));
    return out;
}

std::string PhenomenonResult::to_text() const {
    std::ostringstream os;
    os.precision(10);
    os << "phenomenon: " << phenomenon << "\n";
    os << "feasible: " << to_string(feasible) << "\n";
    os << "gate: " << gate << "\n";
    os << "sigma: " << sigma << "  chi: " << chi << "\n";
    if (limit_value) os << "limit value: " << *limit_value << "\n";
    if (epsilon_correction != 0.0) os << "epsilon correction: " << epsilon_correction << "\n";
    if (witness)
        os << "witness: m=" << witness->m << " T=" << witness->T << " lambda=" << witness->lambda
           << "\n";
    if (!definition_holds || !notes.empty()) os << "note: " << notes << "\n";
    return os.str();
}

}  // namespace patchlam
