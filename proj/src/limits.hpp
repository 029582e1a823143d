#pragma once

#include <optional>
#include <string>
#include <vector>

#include "path.hpp"
#include "simplex.hpp"

// Closed-form / quadrature evaluation of the asymptotic limits of the growth
// rate (m or T to 0 or infinity), the universal bounds sigma and chi, and the
// monotonicity/convexity diagnostics of the T->0 profile.

namespace patchlam {

// sigma = int_0^1 min_i r_i, chi = int_0^1 max_i r_i. Exact on constant
// segments; crossing points of the r_i located by bisection on smooth ones.
std::pair<double, double> sigma_chi(const PiecewiseMatrixPath& growth);
std::pair<double, double> sigma_chi(const PatchModel& model);

// max_i of the mean growth rates (the m -> 0 limit for any T).
double lambda_m_to_0(const PatchModel& model);

// lambda_max of the averaged matrix R + mL (the T -> 0 limit). Requires H2.
double lambda_T_to_0(const PatchModel& model, double m);

// Formula values of the hypothesis-gated limits. These evaluate the
// integrals unconditionally; gating lives in limit_report.
double lambda_T_to_inf_formula(const PatchModel& model, double m);  // int lambda_max(A(tau))
double lambda_m_to_inf_formula(const PatchModel& model);            // sum_i int p_i r_i

struct CornerLimits {
    double lambda_00 = 0.0;    // max_i mean growth
    double lambda_0inf = 0.0;  // chi
    double lambda_inf0 = 0.0;  // sum_i q_i * mean growth, q the kernel vector of the averaged L
};
CornerLimits corner_limits(const PatchModel& model);

struct GatedValue {
    std::optional<double> value;
    std::string hypothesis;          // which hypothesis gates it
    Verdict verdict = Verdict::Inconclusive;
    bool forced = false;             // value computed despite an unverified hypothesis
    std::string note;                // e.g. why the value is absent
};

struct LimitReport {
    double m = 0.0;
    double sigma = 0.0;
    double chi = 0.0;
    double lambda_0T = 0.0;    // m -> 0
    double lambda_m0 = 0.0;    // T -> 0 at the given m
    GatedValue lambda_mInf;    // T -> infinity, gated by H3
    GatedValue lambda_infT;    // m -> infinity, gated by H4
    double lambda_00 = 0.0;
    GatedValue lambda_0inf;    // chi, gated by H3
    double lambda_inf0 = 0.0;
    HypothesisReport h3;
    HypothesisReport h4;

    std::string to_text() const;
};

// Assembles the full limit table, running the H3/H4 checkers to gate the
// large-T and large-m formulas. With force=true the formulas are evaluated
// anyway and labeled as hypothesis-unverified. Throws HypothesisError when
// H2 fails.
LimitReport limit_report(const PatchModel& model, double m, bool force = false,
                         const SamplingParams& params = {});

struct ProfileDiagnostics {
    std::vector<double> m;             // the grid
    std::vector<double> value;         // lambda(m, 0) on the grid
    std::vector<double> first_diff;    // central first differences (interior points)
    std::vector<double> second_diff;   // central second differences (interior points)
    bool strictly_decreasing = false;  // successive values drop by more than 1e-10
    bool convex = false;               // second differences exceed 1e-10
    std::optional<double> constant_at; // set when all mean growth rates coincide
};

// Evaluates lambda(m,0) over the grid and reports numeric difference
// diagnostics (Prop-style: decreasing and convex unless the mean growth
// rates are all equal).
ProfileDiagnostics lambda_m0_profile(const PatchModel& model, const std::vector<double>& m_grid);

}  // namespace patchlam
