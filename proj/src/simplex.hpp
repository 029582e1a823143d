#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "path.hpp"

// Frozen-tau dynamics on the unit simplex and the sampled certification
// protocol for the stability hypotheses: H2 (irreducible averaged migration),
// H3 (the dominant eigenvector of A(tau) is a uniformly attracting
// equilibrium of the proportion dynamics) and H4 (likewise for the kernel
// vector of L(tau)).

namespace patchlam {

// F(theta) = A theta - <A theta, 1> theta; tangent to the simplex.
Vector simplex_field(const Matrix& a, const Vector& theta);

struct FrozenFlowResult {
    std::vector<std::pair<double, Vector>> trajectory;  // (s, theta(s)) samples
    Vector end;
};

// Integrates d theta/ds = F(theta) with the frozen matrix a, projecting
// round-off negatives (>= -1e-12) to zero and renormalizing each step.
// Components below -1e-9 abort with NumericError. stop_near, when given,
// ends the integration once theta is within 1e-8 of it.
FrozenFlowResult frozen_flow(const Matrix& a, Vector theta0, double horizon,
                             const Vector* stop_near = nullptr, bool record = false);

enum class Verdict { VerifiedSampled, Violated, Inconclusive };

std::string to_string(Verdict v);

struct Witness {
    double tau = 0.0;
    std::string reason;            // short machine-ish tag
    std::string detail;            // human-readable account
    std::optional<Vector> data;    // e.g. the trajectory endpoint
    bool inconclusive_only = false;  // did not prove a violation, only failed to certify
};

struct SamplingParams {
    int samples_per_segment = 33;   // Chebyshev-spaced; constant segments collapse to 1
    int perturbations = 16;         // random simplex directions per sampled tau
    double radius = 1e-3;           // perturbation radius
    std::uint64_t seed = 1729;      // base seed for the perturbation directions
    double stability_tol = 1e-9;    // Jacobian real parts must be below -stability_tol
    double convergence_tol = 1e-6;  // endpoint distance defining convergence
    double handoff_constant = 50.0; // horizon = handoff_constant / local rate
    double horizon_floor = 10.0;
    double horizon_cap = 1e4;
};

struct HypothesisReport {
    std::string hypothesis;  // "H2" | "H3" | "H4"
    Verdict verdict = Verdict::Inconclusive;
    std::vector<Witness> witnesses;
    SamplingParams sampling;
    int segments_checked = 0;
    int taus_sampled = 0;
    double m = 0.0;  // H3 only

    bool verified() const { return verdict == Verdict::VerifiedSampled; }
    std::string to_text() const;
};

HypothesisReport check_h2(const PatchModel& model);
HypothesisReport check_h3(const PatchModel& model, double m, const SamplingParams& params = {});
HypothesisReport check_h4(const PatchModel& model, const SamplingParams& params = {});

// Eigenvalues of the simplex-tangent Jacobian of F at an equilibrium theta;
// exposed for tests.
Eigen::VectorXcd tangent_jacobian_eigenvalues(const Matrix& a, const Vector& theta);

}  // namespace patchlam
