#include "simplex.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "ode.hpp"

namespace patchlam {

namespace {

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string format_vector(const Vector& v) {
    std::ostringstream os;
    os.precision(6);
    os << "(";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << v[i];
    }
    os << ")";
    return os.str();
}

// Orthonormal basis of the simplex tangent space {u : sum u = 0}, as the
// last n-1 columns of the Householder reflection sending e1 to 1/sqrt(n).
Matrix tangent_basis(int n) {
    Vector v = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    Vector w = v;
    w[0] -= 1.0;
    const double norm = w.norm();
    Matrix h = Matrix::Identity(n, n);
    if (norm > 1e-14) {
        w /= norm;
        h -= 2.0 * w * w.transpose();
    }
    return h.rightCols(n - 1);
}

struct EquilibriumCandidate {
    Vector theta;
    double eigenvalue;
};

// All nonnegative (essentially real) eigenvector directions of a, normalized
// to the simplex. Used to name the attractor a failed handoff got captured by.
std::vector<EquilibriumCandidate> equilibrium_candidates(const Matrix& a) {
    const Eigen::Index n = a.rows();
    std::vector<EquilibriumCandidate> out;
    const double shift = 1.0 + a.diagonal().cwiseAbs().maxCoeff();
    Eigen::EigenSolver<Matrix> solver(a + shift * Matrix::Identity(n, n));
    if (solver.info() != Eigen::Success) return out;
    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(solver.eigenvalues()[k].imag()) > 1e-9) continue;
        Vector v = solver.eigenvectors().col(k).real();
        if (v.sum() < 0) v = -v;
        const double scale = v.cwiseAbs().maxCoeff();
        if (scale <= 0) continue;
        bool nonneg = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (v[i] < -1e-9 * scale) {
                nonneg = false;
                break;
            }
            if (v[i] < 0) v[i] = 0;
        }
        if (!nonneg || v.sum() <= 0) continue;
        out.push_back({Vector(v / v.sum()), solver.eigenvalues()[k].real() - shift});
    }
    return out;
}

double sup_norm(const Matrix& a) {
    return a.cwiseAbs().maxCoeff();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = seed ^ (a * 0x9E3779B97F4A7C15ULL) ^ (b * 0xBF58476D1CE4E5B9ULL);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

// One perturbed start on the simplex near theta.
Vector perturbed_start(const Vector& theta, double radius, std::mt19937_64& rng) {
    const Eigen::Index n = theta.size();
    std::normal_distribution<double> gauss(0.0, 1.0);
    Vector d(n);
    for (Eigen::Index i = 0; i < n; ++i) d[i] = gauss(rng);
    d.array() -= d.mean();  // tangent direction
    const double norm = d.norm();
    if (norm < 1e-14) return theta;
    Vector start = theta + (radius / norm) * d;
    for (Eigen::Index i = 0; i < n; ++i) start[i] = std::max(start[i], 0.0);
    const double sum = start.sum();
    return sum > 0 ? Vector(start / sum) : theta;
}

struct FrozenProblem {
    // Everything the per-tau protocol needs about one frozen matrix.
    Matrix a;
    SpectralResult spectral;
    Vector equilibrium;       // valid when usable
    double rate = 0.0;        // local contraction rate at the equilibrium
    bool usable = false;
};

}  // namespace

Vector simplex_field(const Matrix& a, const Vector& theta) {
    const Vector flow = a * theta;
    return flow - flow.sum() * theta;
}

Eigen::VectorXcd tangent_jacobian_eigenvalues(const Matrix& a, const Vector& theta) {
    const int n = static_cast<int>(a.rows());
    const Vector flow = a * theta;
    const double growth = flow.sum();
    const Vector column_sums = a.colwise().sum();
    // DF = A - <A theta, 1> I - theta * (1^T A)
    Matrix jac = a - growth * Matrix::Identity(n, n) - theta * column_sums.transpose();
    if (n == 1) return Eigen::VectorXcd::Zero(0);
    const Matrix basis = tangent_basis(n);
    const Matrix reduced = basis.transpose() * jac * basis;
    Eigen::EigenSolver<Matrix> solver(reduced);
    return solver.eigenvalues();
}

FrozenFlowResult frozen_flow(const Matrix& a, Vector theta0, double horizon,
                             const Vector* stop_near, bool record) {
    OdeOptions opt;
    opt.rel_tol = 1e-9;
    opt.abs_tol = 1e-12;
    FrozenFlowResult out;
    if (record) out.trajectory.emplace_back(0.0, theta0);

    auto rhs = [&](double, const Vector& y) -> Vector { return simplex_field(a, y); };
    OdeHooks<Vector> hooks;
    hooks.post_step = [&](double s, Vector& y) {
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            if (y[i] < -1e-9) return false;
            if (y[i] < 0.0) y[i] = 0.0;
        }
        y /= y.sum();
        if (record) out.trajectory.emplace_back(s, y);
        return true;
    };
    if (stop_near) {
        hooks.stop = [stop_near](double, const Vector& y) {
            return (y - *stop_near).cwiseAbs().maxCoeff() <= 1e-8;
        };
    }
    out.end = integrate_dp45<Vector>(rhs, 0.0, horizon, std::move(theta0), opt, hooks);
    return out;
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::VerifiedSampled: return "verified-sampled";
        case Verdict::Violated: return "violated";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

namespace {

// Shared four-step checker core for H3 (field of A(tau) = R + mL) and H4
// (field of L(tau) with the kernel vector as equilibrium).
class HypothesisChecker {
public:
    HypothesisChecker(std::string name, const SamplingParams& params, bool expect_zero_abscissa)
        : params_(params), expect_zero_abscissa_(expect_zero_abscissa) {
        report_.hypothesis = std::move(name);
        report_.sampling = params;
    }

    HypothesisReport run(const std::vector<double>& breaks,
                         const std::function<Matrix(double)>& matrix_at,
                         const std::function<Matrix(double)>& matrix_left_limit,
                         const std::function<bool(int)>& segment_constant) {
        const int segs = static_cast<int>(breaks.size());
        report_.segments_checked = segs;

        std::vector<FrozenProblem> at_break(static_cast<size_t>(segs));
        for (int k = 0; k < segs; ++k) {
            const double begin = breaks[static_cast<size_t>(k)];
            const double end = k + 1 < segs ? breaks[static_cast<size_t>(k) + 1] : 1.0;
            const bool constant = segment_constant(k);
            const int count = constant ? 1 : params_.samples_per_segment;
            for (int s = 0; s < count; ++s) {
                // Chebyshev nodes for smooth segments; the left endpoint for
                // constant ones.
                const double tau =
                    constant ? begin
                             : 0.5 * (begin + end) +
                                   0.5 * (end - begin) *
                                       std::cos(M_PI * (2.0 * s + 1.0) / (2.0 * count));
                FrozenProblem problem = analyze(tau, matrix_at(tau));
                ++report_.taus_sampled;
                if (s == 0 || tau == begin) at_break[static_cast<size_t>(k)] = problem;
                if (!problem.usable) continue;
                sample_basin(tau, problem, k, s);
            }
            if (!constant) {
                // Make sure the segment-start data used for the handoff is
                // evaluated exactly at the breakpoint.
                at_break[static_cast<size_t>(k)] = analyze(begin, matrix_at(begin));
            }
        }

        // Handoff across every breakpoint, wrapping 1 -> 0.
        for (int k = 0; k < segs; ++k) {
            const double tau = breaks[static_cast<size_t>(k)];
            const FrozenProblem& here = at_break[static_cast<size_t>(k)];
            if (!here.usable) continue;  // witnessed already in step (a)/(b)
            const Matrix left = matrix_left_limit(tau);
            const SpectralResult left_spec = spectral_abscissa(left);
            if (!left_spec.eigvec) continue;  // the owning segment carries the witness
            run_handoff(tau, here, *left_spec.eigvec);
        }

        finalize();
        return report_;
    }

private:
    FrozenProblem analyze(double tau, Matrix a) {
        FrozenProblem problem;
        problem.a = std::move(a);
        problem.spectral = spectral_abscissa(problem.a);

        if (!problem.spectral.simple) {
            const char* what = expect_zero_abscissa_
                                   ? "0 is not a simple eigenvalue of the migration matrix"
                                   : "dominant eigenvalue is not simple";
            witness(tau, "non-simple", std::string(what) + " (gap " +
                                           format_number(problem.spectral.gap) + ")",
                    std::nullopt, false);
            return problem;
        }
        if (!problem.spectral.eigvec) {
            witness(tau, "no-eigenvector", "no nonnegative dominant eigenvector", std::nullopt,
                    false);
            return problem;
        }
        problem.equilibrium = *problem.spectral.eigvec;

        const Eigen::VectorXcd eig = tangent_jacobian_eigenvalues(problem.a, problem.equilibrium);
        double max_real = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < eig.size(); ++i) max_real = std::max(max_real, eig[i].real());
        if (eig.size() > 0 && max_real >= -params_.stability_tol) {
            witness(tau, "not-attracting",
                    "equilibrium is not linearly stable on the simplex (max Re = " +
                        format_number(max_real) + ")",
                    problem.equilibrium, false);
            return problem;
        }
        problem.rate = eig.size() > 0 ? -max_real : 1.0;

        // The frozen flow is the projectivized linear flow, so its time
        // scales are the pairwise gaps between the real parts of the
        // eigenvalues of A. The Jacobian spectrum at the dominant direction
        // is {lambda_i - lambda_1}; adjoining 0 recovers every pairwise gap.
        // A handoff trajectory can crawl along an invariant face at the
        // smallest of these, so the horizon must honor it.
        std::vector<double> reals{0.0};
        for (Eigen::Index i = 0; i < eig.size(); ++i) reals.push_back(eig[i].real());
        for (size_t i = 0; i < reals.size(); ++i)
            for (size_t j = i + 1; j < reals.size(); ++j) {
                const double gap = std::abs(reals[i] - reals[j]);
                if (gap > params_.stability_tol) problem.rate = std::min(problem.rate, gap);
            }
        problem.usable = true;
        return problem;
    }

    double horizon_for(double rate) const {
        return std::clamp(params_.handoff_constant / std::max(rate, 1e-300),
                          params_.horizon_floor, params_.horizon_cap);
    }

    // Step (d): sampled uniform-basin test around the equilibrium.
    void sample_basin(double tau, const FrozenProblem& problem, int segment, int sample) {
        std::mt19937_64 rng(mix_seed(params_.seed, static_cast<std::uint64_t>(segment),
                                     static_cast<std::uint64_t>(sample)));
        const double horizon = horizon_for(problem.rate);
        for (int j = 0; j < params_.perturbations; ++j) {
            const Vector start = perturbed_start(problem.equilibrium, params_.radius, rng);
            classify_flow(tau, problem, start, horizon,
                          "perturbation " + std::to_string(j) + " of radius " +
                              format_number(params_.radius));
            if (report_.witnesses.size() > 64) return;  // cap witness spam
        }
    }

    void run_handoff(double tau, const FrozenProblem& problem, const Vector& left_equilibrium) {
        classify_flow(tau, problem, left_equilibrium, horizon_for(problem.rate),
                      "left-limit equilibrium " + format_vector(left_equilibrium));
    }

    void classify_flow(double tau, const FrozenProblem& problem, const Vector& start,
                       double horizon, const std::string& what) {
        FrozenFlowResult flow;
        try {
            flow = frozen_flow(problem.a, start, horizon, &problem.equilibrium);
        } catch (const NumericError& err) {
            witness(tau, "integrator-failure", std::string(what) + ": " + err.what(), std::nullopt,
                    true);
            return;
        }
        const double dist = (flow.end - problem.equilibrium).cwiseAbs().maxCoeff();
        if (dist <= params_.convergence_tol) return;

        const double residual = simplex_field(problem.a, flow.end).cwiseAbs().maxCoeff();
        const double stationary_tol = 1e-9 * (1.0 + sup_norm(problem.a));
        if (residual <= stationary_tol) {
            std::string where = format_vector(flow.end);
            for (const auto& cand : equilibrium_candidates(problem.a)) {
                if ((flow.end - cand.theta).cwiseAbs().maxCoeff() <= params_.convergence_tol) {
                    where += " (eigenvector of eigenvalue " + format_number(cand.eigenvalue) + ")";
                    break;
                }
            }
            witness(tau, "captured-elsewhere",
                    what + " converges to a different equilibrium at " + where + ", not to " +
                        format_vector(problem.equilibrium),
                    flow.end, false);
        } else {
            witness(tau, "horizon-exhausted",
                    what + " did not settle within horizon " + format_number(horizon),
                    flow.end, true);
        }
    }

    void witness(double tau, std::string reason, std::string detail, std::optional<Vector> data,
                 bool inconclusive_only) {
        report_.witnesses.push_back(
            {tau, std::move(reason), std::move(detail), std::move(data), inconclusive_only});
    }

    void finalize() {
        bool violated = false, inconclusive = false;
        for (const auto& w : report_.witnesses)
            (w.inconclusive_only ? inconclusive : violated) = true;
        report_.verdict = violated ? Verdict::Violated
                          : inconclusive ? Verdict::Inconclusive
                                         : Verdict::VerifiedSampled;
    }

    SamplingParams params_;
    bool expect_zero_abscissa_;
    HypothesisReport report_;
};

}  // namespace

HypothesisReport check_h2(const PatchModel& model) {
    HypothesisReport report;
    report.hypothesis = "H2";
    report.segments_checked = model.migration.segment_count();
    const Matrix avg = model.migration.average();
    if (is_irreducible(avg, 1e-12)) {
        report.verdict = Verdict::VerifiedSampled;
    } else {
        report.verdict = Verdict::Violated;
        report.witnesses.push_back(
            {0.0, "reducible", "the averaged migration matrix is reducible", std::nullopt, false});
    }
    return report;
}

HypothesisReport check_h3(const PatchModel& model, double m, const SamplingParams& params) {
    if (!(m > 0.0)) throw std::invalid_argument("check_h3 requires m > 0");
    const CombinedPath combined = merge_breakpoints(model.growth, model.migration);
    HypothesisChecker checker("H3", params, /*expect_zero_abscissa=*/false);
    HypothesisReport report = checker.run(
        combined.breakpoints(), [&](double tau) { return combined.at(tau, m); },
        [&](double tau) -> Matrix {
            return model.growth.left_limit(tau) + m * model.migration.left_limit(tau);
        },
        [&](int k) { return combined.segment_is_constant(k); });
    report.m = m;
    return report;
}

HypothesisReport check_h4(const PatchModel& model, const SamplingParams& params) {
    const PiecewiseMatrixPath& migration = model.migration;
    HypothesisChecker checker("H4", params, /*expect_zero_abscissa=*/true);
    return checker.run(
        migration.breakpoints(), [&](double tau) { return migration.at(tau); },
        [&](double tau) { return migration.left_limit(tau); },
        [&](int k) { return migration.segment_is_constant(k); });
}

std::string HypothesisReport::to_text() const {
    std::ostringstream os;
    os << "hypothesis: " << hypothesis << "\n";
    os << "verdict: " << to_string(verdict) << "\n";
    if (hypothesis == "H3") os << "m: " << m << "\n";
    if (hypothesis != "H2") {
        os << "sampling: segments=" << segments_checked << " taus=" << taus_sampled
           << " samples-per-smooth-segment=" << sampling.samples_per_segment
           << " perturbations=" << sampling.perturbations << " radius=" << sampling.radius
           << " seed=" << sampling.seed << " convergence-tol=" << sampling.convergence_tol
           << " stability-tol=" << sampling.stability_tol << "\n";
    }
    for (size_t i = 0; i < witnesses.size(); ++i) {
        const auto& w = witnesses[i];
        os << "witness[" << i << "]: tau=" << w.tau << " kind=" << w.reason << " " << w.detail;
        if (w.data) os << " endpoint=" << format_vector(*w.data);
        os << "\n";
    }
    return os.str();
}

}  // namespace patchlam
