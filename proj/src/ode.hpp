#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>

#include "matrix.hpp"

// Embedded Dormand-Prince 5(4) stepper, templated on the state type
// (Eigen vectors and matrices both work). Integration over paths with
// breakpoints is done by the callers one segment at a time, so steps never
// cross a discontinuity.

namespace patchlam {

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    std::optional<double> initial_step;
    long max_steps = 20'000'000;
};

template <class State>
struct OdeHooks {
    // Called after each accepted step; may project the state (e.g. back onto
    // the simplex). Returning false aborts with a NumericError.
    std::function<bool(double t, State& y)> post_step;
    // Called after each accepted step; returning true stops the integration
    // early (the current state is returned).
    std::function<bool(double t, const State& y)> stop;
};

namespace ode_detail {

inline double err_weight(double y0, double y1, double atol, double rtol) {
    return atol + rtol * std::max(std::abs(y0), std::abs(y1));
}

template <class State>
double error_norm(const State& err, const State& y0, const State& y1, const OdeOptions& opt) {
    double acc = 0.0;
    const auto* e = err.data();
    const auto* a = y0.data();
    const auto* b = y1.data();
    const long n = static_cast<long>(err.size());
    for (long i = 0; i < n; ++i) {
        const double w = err_weight(a[i], b[i], opt.abs_tol, opt.rel_tol);
        const double r = e[i] / w;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

}  // namespace ode_detail

// Integrates dy/dt = f(t, y) from t0 to t1 (t1 > t0). Returns y(t1).
template <class State, class F>
State integrate_dp45(F&& f, double t0, double t1, State y, const OdeOptions& opt = {},
                     const OdeHooks<State>& hooks = {}) {
    // Dormand-Prince coefficients.
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

    if (!(t1 > t0)) return y;
    double t = t0;
    State k1 = f(t, y);
    double h = opt.initial_step.value_or(std::min((t1 - t0) / 16.0, opt.max_step));
    h = std::min(h, t1 - t0);
    long steps = 0;

    while (t < t1) {
        if (++steps > opt.max_steps)
            throw NumericError("ode integrator exceeded the step budget; tolerance too tight or "
                               "the problem is stiff");
        h = std::min(h, t1 - t);
        const State k2 = f(t + c2 * h, State(y + h * (a21 * k1)));
        const State k3 = f(t + c3 * h, State(y + h * (a31 * k1 + a32 * k2)));
        const State k4 = f(t + c4 * h, State(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
        const State k5 = f(t + c5 * h, State(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
        const State k6 =
            f(t + h, State(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
        State y_next = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const State k7 = f(t + h, y_next);
        const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double norm = ode_detail::error_norm(err, y, y_next, opt);
        if (norm <= 1.0) {
            t += h;
            y = std::move(y_next);
            k1 = k7;  // FSAL
            if (hooks.post_step) {
                if (!hooks.post_step(t, y))
                    throw NumericError("ode integrator state left the admissible region");
                k1 = f(t, y);  // the hook may have projected the state
            }
            if (hooks.stop && hooks.stop(t, y)) return y;
        }
        const double factor =
            norm > 0.0 ? 0.9 * std::pow(norm, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        h = std::min(h, opt.max_step);
        if (!(h > 0.0) || t + h == t)
            throw NumericError("ode integrator step size underflow at t=" + std::to_string(t));
    }
    return y;
}

}  // namespace patchlam
