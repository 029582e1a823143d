#include "monodromy.hpp"

#include <algorithm>
#include <cmath>

#include "ode.hpp"

namespace patchlam {

namespace {

constexpr double kSmoothSegmentRelTol = 1e-10;

// Propagator of one Smooth segment of the path scaled by T, by adaptive RK on
// the matrix-valued equation dY/dtau = T A(tau) Y.
Matrix smooth_segment_propagator(const PiecewiseMatrixPath& a, int k, double T, double shift) {
    const int n = a.dim();
    const double begin = a.segment_begin(k), end = a.segment_end(k);
    OdeOptions opt;
    opt.rel_tol = kSmoothSegmentRelTol;
    opt.abs_tol = 1e-13;
    if (const auto lip = a.segment(k).lipschitz; lip && *lip > 0.0)
        opt.initial_step = std::min(end - begin, 1.0 / (T * *lip));
    auto rhs = [&](double tau, const Matrix& y) -> Matrix {
        if (tau == end) tau = std::nextafter(end, begin);  // stay inside the half-open segment
        return T * (a.at(tau) - shift * Matrix::Identity(n, n)) * y;
    };
    Matrix y = integrate_dp45<Matrix>(rhs, begin, end, Matrix::Identity(n, n), opt);
    if (!y.allFinite())
        throw NumericError("fundamental_matrix: non-finite entries while integrating a smooth "
                           "segment; rescale the model");
    return y;
}

// Spectral abscissa of A over a segment (sampled for Smooth segments),
// used as the per-segment diagonal shift: the shifted propagator then has
// spectral radius one, so its largest entry stays near unity and the
// running product neither overflows nor underflows.
double segment_shift(const PiecewiseMatrixPath& a, int k) {
    if (a.segment_is_constant(k)) return spectral_abscissa(a.segment_matrix(k)).lambda_max;
    const double begin = a.segment_begin(k), end = a.segment_end(k);
    double best = -std::numeric_limits<double>::infinity();
    for (int s = 0; s < 17; ++s) {
        const double tau = begin + (end - begin) * (s + 0.5) / 17.0;
        best = std::max(best, spectral_abscissa(a.at(tau)).lambda_max);
    }
    return best;
}

struct ScaledProduct {
    Matrix P;          // normalized so the largest entry is 1
    double log_total;  // true product = P * exp(log_total)
};

// Ordered product over segments, right-to-left, with per-segment diagonal
// shifts and renormalization so the computation never overflows.
ScaledProduct scaled_monodromy(const PiecewiseMatrixPath& a, double T) {
    const int n = a.dim();
    Matrix p = Matrix::Identity(n, n);
    double log_total = 0.0;
    for (int k = 0; k < a.segment_count(); ++k) {
        const double len = a.segment_end(k) - a.segment_begin(k);
        const double shift = segment_shift(a, k);
        Matrix e;
        if (a.segment_is_constant(k)) {
            const Matrix shifted =
                a.segment_matrix(k) - shift * Matrix::Identity(n, n);
            e = matrix_exponential(shifted, T * len);
        } else {
            e = smooth_segment_propagator(a, k, T, shift);
        }
        p = e * p;
        log_total += shift * T * len;
        const double scale = p.cwiseAbs().maxCoeff();
        if (!(scale > 0.0) || !std::isfinite(scale))
            throw NumericError("monodromy product degenerated (scale " + std::to_string(scale) +
                               ")");
        p /= scale;
        log_total += std::log(scale);
    }
    return {std::move(p), log_total};
}

bool strictly_positive_power(Matrix p, int power) {
    Matrix acc = p;
    for (int i = 1; i < power; ++i) {
        acc = acc * p;
        const double scale = acc.cwiseAbs().maxCoeff();
        if (!(scale > 0.0)) return false;
        acc /= scale;
    }
    return (acc.array() > 0.0).all();
}

}  // namespace

Matrix fundamental_matrix(const PiecewiseMatrixPath& a, double T) {
    if (!(T > 0.0)) throw std::invalid_argument("fundamental_matrix: T must be positive");
    const int n = a.dim();
    Matrix x = Matrix::Identity(n, n);
    for (int k = 0; k < a.segment_count(); ++k) {
        const double len = a.segment_end(k) - a.segment_begin(k);
        Matrix e = a.segment_is_constant(k)
                       ? matrix_exponential(a.segment_matrix(k), T * len)
                       : smooth_segment_propagator(a, k, T, 0.0);
        x = e * x;
        if (!x.allFinite())
            throw NumericError("fundamental_matrix overflowed; use growth_rate, which rescales, "
                               "or shift the growth rates");
    }
    return x;
}

MonodromyResult growth_rate(const PatchModel& model, const ModelParameters& params) {
    if (params.m < 0.0) throw std::invalid_argument("growth_rate: m must be >= 0");
    if (!(params.T > 0.0)) throw std::invalid_argument("growth_rate: T must be positive");
    const int n = model.dim();

    MonodromyResult out;
    out.decoupled = params.m == 0.0;
    if (!out.decoupled && !is_irreducible(model.migration.average(), 1e-12))
        throw HypothesisError(
            "average migration matrix reducible — growth rate may be patch-dependent");

    const PiecewiseMatrixPath a = bind(model, params);
    ScaledProduct prod = scaled_monodromy(a, params.T);

    double mu_scaled;
    if (out.decoupled) {
        // A = R is diagonal; the dominant entry sits on the diagonal.
        Eigen::Index arg = 0;
        mu_scaled = prod.P.diagonal().maxCoeff(&arg);
        out.pi = Vector::Zero(n);
        out.pi[arg] = 1.0;
    } else if (is_irreducible(prod.P)) {
        PerronResult pr = perron_root(prod.P);
        mu_scaled = pr.mu;
        out.pi = std::move(pr.pi);
    } else {
        // H2 guarantees the monodromy matrix is irreducible in exact
        // arithmetic, but at extreme m*T the sub-dominant couplings of the
        // stored product underflow to zero. The spectral radius is still
        // correct to double precision; the dominant eigenvector may then have
        // zero entries (their true values are below 1e-300).
        const SpectralResult s = spectral_abscissa(prod.P);
        if (!s.eigvec)
            throw NumericError("monodromy matrix degenerated beyond double precision at m=" +
                               std::to_string(params.m) + ", T=" + std::to_string(params.T));
        mu_scaled = s.lambda_max;
        out.pi = *s.eigvec;
    }

    out.log_mu = std::log(mu_scaled) + prod.log_total;
    out.Lambda = out.log_mu / params.T;
    // Hand back the plain fundamental matrix whenever it is representable.
    if (std::abs(prod.log_total) < 690.0) {
        out.X = prod.P * std::exp(prod.log_total);
        out.log_scale = 0.0;
        out.mu = mu_scaled * std::exp(prod.log_total);
    } else {
        out.X = prod.P;
        out.log_scale = prod.log_total;
        out.mu = mu_scaled;
    }
    out.eventually_positive = strictly_positive_power(prod.P, std::max(1, n));
    return out;
}

TrajectoryResult trajectory_lyapunov(const PatchModel& model, const ModelParameters& params,
                                     const Vector& x0, int periods) {
    const int n = model.dim();
    if (x0.size() != n) throw std::invalid_argument("trajectory_lyapunov: x0 has wrong dimension");
    if (x0.minCoeff() < 0.0 || x0.maxCoeff() <= 0.0)
        throw std::invalid_argument("trajectory_lyapunov: x0 must be nonnegative and nonzero");
    if (periods < 1) throw std::invalid_argument("trajectory_lyapunov: horizon must be >= 1");

    const PiecewiseMatrixPath a = bind(model, params);
    const double T = params.T;
    OdeOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-14;

    TrajectoryResult out;
    out.T = T;
    out.log_norm.reserve(static_cast<size_t>(periods));
    out.proportions.reserve(static_cast<size_t>(periods));

    Vector z = x0 / x0.sum();
    double log_total = std::log(x0.sum());
    for (int p = 0; p < periods; ++p) {
        for (int k = 0; k < a.segment_count(); ++k) {
            const double begin = a.segment_begin(k), end = a.segment_end(k);
            auto rhs = [&](double tau, const Vector& y) -> Vector {
                if (tau == end) tau = std::nextafter(end, begin);
                return T * (a.at(tau) * y);
            };
            z = integrate_dp45<Vector>(rhs, begin, end, std::move(z), opt);
        }
        const double s = z.sum();
        if (!(s > 0.0) || !std::isfinite(s))
            throw NumericError("trajectory_lyapunov: trajectory norm degenerated");
        z /= s;
        log_total += std::log(s);
        out.log_norm.push_back(log_total);
        out.proportions.push_back(z);
    }

    // Estimates from the increment over the second half of the horizon: the
    // proportions converge geometrically to the periodic orbit, so the
    // increment form sheds the O(1/t) start-up bias of the raw prefix
    // average. ln x_i(kT) = ln z_i(k) + log_norm[k].
    const size_t burn = static_cast<size_t>(periods) / 2;
    const double span = static_cast<double>(periods - static_cast<int>(burn)) * T;
    const double base = burn == 0 ? std::log(x0.sum()) : out.log_norm[burn - 1];
    const Vector z_base = burn == 0 ? Vector(x0 / x0.sum()) : out.proportions[burn - 1];
    out.per_patch = Vector(n);
    for (int i = 0; i < n; ++i) {
        if (z[i] > 0.0 && z_base[i] > 0.0)
            out.per_patch[i] = (std::log(z[i]) + log_total - std::log(z_base[i]) - base) / span;
        else
            out.per_patch[i] = -std::numeric_limits<double>::infinity();
    }
    out.shared = (log_total - base) / span;
    return out;
}

SimplexOrbit periodic_simplex_orbit(const PatchModel& model, const ModelParameters& params) {
    const MonodromyResult mono = growth_rate(model, params);
    const int n = model.dim();
    const PiecewiseMatrixPath a = bind(model, params);
    const double T = params.T;

    OdeOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_tol = 1e-14;

    SimplexOrbit out;
    // State: theta followed by the running integral of <A theta, 1>.
    Vector u(n + 1);
    u.head(n) = mono.pi;
    u[n] = 0.0;
    out.samples.emplace_back(0.0, mono.pi);

    for (int k = 0; k < a.segment_count(); ++k) {
        const double begin = a.segment_begin(k), end = a.segment_end(k);
        auto rhs = [&](double tau, const Vector& y) -> Vector {
            if (tau == end) tau = std::nextafter(end, begin);
            const Matrix m = a.at(tau);
            const Vector theta = y.head(n);
            const Vector flow = m * theta;
            const double growth = flow.sum();
            Vector d(n + 1);
            d.head(n) = T * (flow - growth * theta);
            d[n] = growth;
            return d;
        };
        OdeHooks<Vector> hooks;
        hooks.post_step = [&](double tau, Vector& y) {
            out.samples.emplace_back(tau, Vector(y.head(n)));
            return true;
        };
        u = integrate_dp45<Vector>(rhs, begin, end, std::move(u), opt, hooks);
    }

    const double drift = (u.head(n) - mono.pi).cwiseAbs().maxCoeff();
    if (drift > 1e-7)
        throw NumericError("periodicity violated — integrator tolerance insufficient (drift " +
                           std::to_string(drift) + ")");
    out.integral = u[n];
    return out;
}

}  // namespace patchlam
