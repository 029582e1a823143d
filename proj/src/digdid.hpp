#pragma once

#include <optional>
#include <string>
#include <vector>

#include "limits.hpp"
#include "path.hpp"
#include "simplex.hpp"

// Sink/source classification, sweep-based detection of dispersal-induced
// growth (all patches sinks yet Lambda > 0) and decay (all patches sources
// yet Lambda < 0), and the worst-patch migration construction that realizes
// the lower bound sigma in the large-m limit.

namespace patchlam {

enum class PatchLabel { Sink, Source, Neutral };

struct PatchClassification {
    Vector rbar;
    std::vector<PatchLabel> labels;
    double sigma = 0.0;
    double chi = 0.0;
};

PatchClassification classify(const PatchModel& model);

enum class Feasibility {
    TheoryCertain,     // guaranteed by the gate (limit formula has the right sign)
    FoundNumerically,  // a sweep witness exists but no hypothesis backs the limit
    Impossible,        // a necessary condition fails
    Undetermined,      // gate passes but unverified, and the sweep found nothing
};

std::string to_string(Feasibility f);

struct SweepWitness {
    double m = 0.0;
    double T = 0.0;
    double lambda = 0.0;
};

struct PhenomenonResult {
    std::string phenomenon;  // "DIG" | "DID"
    Feasibility feasible = Feasibility::Undetermined;
    std::optional<SweepWitness> witness;
    std::string gate;        // the theory check used to decide feasibility
    bool definition_holds = false;  // all patches sinks (DIG) / sources (DID)
    double sigma = 0.0;
    double chi = 0.0;
    std::optional<double> limit_value;   // gating limit formula value, when computed
    double epsilon_correction = 0.0;     // DID case-2 correction term
    Verdict hypothesis_verdict = Verdict::Inconclusive;  // H3 (DIG) / H4 (DID)
    std::optional<PiecewiseMatrixPath> constructed_migration;  // DID only
    std::string notes;

    std::string to_text() const;
};

// Sweeps Lambda over the grid in lexicographic (m, T) order (m = 0 points are
// skipped: no dispersal, no phenomenon) and gates on chi (Impossible when
// chi <= 0). Theory-certainty requires the H3 check, run at the smallest
// positive m of the grid.
PhenomenonResult dig_scan(const PatchModel& model, const std::vector<double>& m_grid,
                          const std::vector<double>& T_grid, const SamplingParams& params = {});

struct MinimizerPiece {
    double begin = 0.0;
    double end = 0.0;
    int patch = 0;  // argmin of the growth rates on [begin, end)
};

struct MinimizerPartition {
    std::vector<MinimizerPiece> pieces;
    std::vector<bool> attains;  // per patch: attains the minimum on some piece
};

// Piecewise-constant argmin map of the growth rates; ties break to the lowest
// patch index. Crossings inside smooth segments are located by bisection,
// capped at 1024 per segment.
MinimizerPartition minimizer_partition(const PiecewiseMatrixPath& growth);

// Migration path that sends every patch's outflow to the currently worst
// patch (rate 1). Patches that never attain the minimum receive an extra
// epsilon inflow on the first piece so the average stays irreducible;
// epsilon must then be positive. Columns sum to zero exactly.
PiecewiseMatrixPath did_construct(const PiecewiseMatrixPath& growth, double epsilon);

// DID scan. Without user_migration the worst-patch construction is used and
// the scan is gated on sigma plus the epsilon correction. With a
// user-supplied time-independent migration matrix, the infimum
// sum_i q_i rbar_i decides (dispersal-induced decay cannot occur under a
// time-independent matrix when all patches are sources).
PhenomenonResult did_scan(const PiecewiseMatrixPath& growth, const std::vector<double>& m_grid,
                          const std::vector<double>& T_grid, double epsilon,
                          const PiecewiseMatrixPath* user_migration = nullptr,
                          const SamplingParams& params = {});

// Log-spaced grid helper (the default sweep grids are 13 points over
// [1e-2, 1e3] in both m and T).
std::vector<double> log_grid(double lo, double hi, int count);

}  // namespace patchlam
