#pragma once

#include <utility>
#include <vector>

#include "path.hpp"

// Fundamental matrix X(T) of dx/dt = A(t/T) x over one period, its
// Perron-Frobenius data, and the growth rate Lambda(m,T) = ln(mu)/T.
// A trajectory-based Lyapunov estimator is provided as an independent check
// of the spectral route.

namespace patchlam {

struct MonodromyResult {
    // Stored monodromy matrix. When the true X(T) fits in double range,
    // log_scale == 0 and X is the fundamental matrix itself; for extreme
    // T the matrix is kept normalized and the true X equals X * exp(log_scale).
    Matrix X;
    double log_scale = 0.0;
    double mu = 0.0;      // Perron root of the stored X (so X*pi == mu*pi holds as stored)
    double log_mu = 0.0;  // ln of the true Perron root: ln(mu) + log_scale
    Vector pi;            // simplex-normalized dominant eigenvector
    double Lambda = 0.0;  // growth rate, log_mu / T
    bool decoupled = false;            // m == 0: Lambda = max_i mean growth, by convention
    bool eventually_positive = false;  // X^n > 0 strictly (positivity heuristic, reported only)
};

// Plain ordered product of segment propagators (exact matrix exponentials on
// Constant segments, adaptive RK on Smooth segments at rel_tol 1e-10).
// Throws NumericError on overflow; use growth_rate for large T.
Matrix fundamental_matrix(const PiecewiseMatrixPath& a, double T);

// Requires H2 (irreducible averaged migration) when m > 0. At m = 0 the
// patches decouple and Lambda = max_i mean-growth is returned with the
// decoupled flag set. Internally the propagator product is rescaled segment
// by segment, so arbitrarily large T stays finite.
MonodromyResult growth_rate(const PatchModel& model, const ModelParameters& params);

struct TrajectoryResult {
    Vector per_patch;                  // (1/t) ln x_i(t) at the final time
    double shared = 0.0;               // tail estimate of the common exponent
    std::vector<double> log_norm;      // cumulative ln ||x(kT)||_1, one entry per period
    std::vector<Vector> proportions;   // x(kT)/||x(kT)||_1, one entry per period
    double T = 0.0;
};

// Integrates the full system over `periods` periods with per-period
// renormalization (log accumulator). Independent oracle for growth_rate.
TrajectoryResult trajectory_lyapunov(const PatchModel& model, const ModelParameters& params,
                                     const Vector& x0, int periods);

struct SimplexOrbit {
    std::vector<std::pair<double, Vector>> samples;  // (tau, theta*(tau))
    double integral = 0.0;  // (1/T) * int_0^T <A(t/T) theta*(t), 1> dt; equals Lambda
};

// Integrates the proportion dynamics from theta*(0) = pi over one period and
// returns the quadrature value of the growth-rate integral representation.
// Throws NumericError when the orbit fails to close within 1e-7.
SimplexOrbit periodic_simplex_orbit(const PatchModel& model, const ModelParameters& params);

}  // namespace patchlam
