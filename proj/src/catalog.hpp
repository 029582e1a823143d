#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "limits.hpp"
#include "monodromy.hpp"
#include "path.hpp"

// Built-in seasonal patch models with closed-form oracles: the two-patch
// one-way migration pair, the two-patch model with a small backflow, the two
// three-patch symmetric-pair models, and the six three-patch one-way-cycle
// models. Each entry carries the closed forms of the limits it admits and the
// expected H3/H4 verdicts, for regression testing against the numerical
// pipeline.

namespace patchlam {

using ParamMap = std::map<std::string, double>;

struct ParamSpec {
    std::string name;
    double value;  // default
};

struct DomainPredicate {
    std::string description;
    std::function<bool(const ParamMap&)> holds;
};

struct CatalogOracles {
    double sigma = 0.0;
    double chi = 0.0;
    double lambda_0T = 0.0;  // m -> 0
    std::function<double(double m)> lambda_m0;                   // T -> 0
    std::function<std::optional<double>(double m)> lambda_mInf;  // T -> inf; nullopt when H3 fails
    std::optional<double> lambda_infT;    // m -> inf via the kernel-vector formula (H4)
    std::optional<double> lambda_large_m; // expected Lambda at very large m, when known
    double lambda_00 = 0.0;
    std::optional<double> lambda_0inf;
    double lambda_inf0 = 0.0;
    std::function<Verdict(double m)> h3_expected;
    Verdict h4_expected = Verdict::Inconclusive;
    std::optional<double> upper_bound;  // Lambda(m,T) <= this for all m, T
};

struct CatalogEntry {
    std::string name;
    std::string summary;
    std::vector<ParamSpec> params;
    std::vector<DomainPredicate> domain;  // oracle validity conditions
    std::function<PatchModel(const ParamMap&)> build;
    std::function<CatalogOracles(const ParamMap&)> oracles;
};

const std::vector<CatalogEntry>& catalog();
const CatalogEntry* catalog_find(std::string_view name);

// Defaults overlaid with overrides; unknown parameter names are an error.
ParamMap catalog_params(const CatalogEntry& entry, const ParamMap& overrides = {});

// Throws std::invalid_argument naming the first violated domain predicate.
void check_domain(const CatalogEntry& entry, const ParamMap& params);

PatchModel catalog_build(const CatalogEntry& entry, const ParamMap& overrides = {});

struct OracleDiff {
    std::string quantity;
    double expected = 0.0;
    double computed = 0.0;
    double abs_err = 0.0;
    double rel_err = 0.0;
    bool pass = false;
};

struct OracleTolerances {
    double formula_abs = 1e-10;  // closed form vs. limit formulas
    double bound_slack = 1e-9;   // inequality oracles
};

// Compares every available oracle of the entry against the computed limit
// report (and monodromy result, when given). Throws when the binding violates
// a domain predicate.
std::vector<OracleDiff> oracle_check(const CatalogEntry& entry, const ParamMap& binding, double m,
                                     const LimitReport& limits,
                                     const MonodromyResult* mono = nullptr,
                                     const OracleTolerances& tol = {});

}  // namespace patchlam
