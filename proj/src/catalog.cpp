#include "catalog.hpp"

#include <algorithm>
#include <cmath>

namespace patchlam {

namespace {

const std::vector<Rational> kHalves = {{0, 1}, {1, 2}};
const std::vector<Rational> kThirds = {{0, 1}, {1, 3}, {2, 3}};

std::vector<double> to_doubles(const std::vector<Rational>& r) {
    std::vector<double> out;
    out.reserve(r.size());
    for (const auto& x : r) out.push_back(x.value());
    return out;
}

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

Matrix diag3(double a, double b, double c) {
    Matrix m = Matrix::Zero(3, 3);
    m(0, 0) = a;
    m(1, 1) = b;
    m(2, 2) = c;
    return m;
}

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

// Season-to-season relabeling of the three-patch models: every role moves to
// the previous patch index (3 -> 2 -> 1 -> 3).
Matrix rotate_roles(const Matrix& m) {
    Matrix out(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out(i, j) = m((i + 1) % 3, (j + 1) % 3);
    return out;
}

PatchModel seasonal_model(std::string name, const std::vector<Rational>& breaks,
                          std::vector<Matrix> growth, std::vector<Matrix> migration) {
    PatchModel model = make_patch_model(
        PiecewiseMatrixPath::piecewise_constant(to_doubles(breaks), std::move(growth)),
        PiecewiseMatrixPath::piecewise_constant(to_doubles(breaks), std::move(migration)),
        std::move(name));
    model.growth_breaks_exact = breaks;
    model.migration_breaks_exact = breaks;
    return model;
}

// Three-season, three-patch model generated by rotating the first season.
// swap_last_two produces the variants obtained by exchanging seasons 2 and 3.
PatchModel rotating_model(std::string name, const Matrix& growth1, const Matrix& migration1,
                          bool swap_last_two) {
    std::vector<Matrix> growth{growth1, rotate_roles(growth1), rotate_roles(rotate_roles(growth1))};
    std::vector<Matrix> migration{migration1, rotate_roles(migration1),
                                  rotate_roles(rotate_roles(migration1))};
    if (swap_last_two) {
        std::swap(growth[1], growth[2]);
        std::swap(migration[1], migration[2]);
    }
    return seasonal_model(std::move(name), kThirds, std::move(growth), std::move(migration));
}

double get(const ParamMap& p, const std::string& key) {
    return p.at(key);
}

// ---- two-patch seasonal growth (a1 then b1 on patch 1, b2 then a2 on 2) ----

std::vector<Matrix> two_patch_growth(const ParamMap& p) {
    return {diag2(get(p, "a1"), get(p, "b2")), diag2(get(p, "b1"), get(p, "a2"))};
}

CatalogOracles two_patch_common(const ParamMap& p) {
    const double a1 = get(p, "a1"), b1 = get(p, "b1"), a2 = get(p, "a2"), b2 = get(p, "b2");
    const double r1 = 0.5 * (a1 + b1), r2 = 0.5 * (a2 + b2);
    CatalogOracles o;
    o.sigma = 0.5 * (std::min(a1, b2) + std::min(b1, a2));
    o.chi = 0.5 * (std::max(a1, b2) + std::max(b1, a2));
    o.lambda_0T = std::max(r1, r2);
    o.lambda_00 = o.lambda_0T;
    o.lambda_inf0 = 0.5 * (r1 + r2);  // the averaged migration is symmetric
    o.lambda_m0 = [r1, r2](double m) {
        return 0.5 * (r1 + r2 - m + std::sqrt((r1 - r2) * (r1 - r2) + m * m));
    };
    o.lambda_0inf = o.chi;
    return o;
}

const std::vector<DomainPredicate> kTwoPatchDomain = {
    {"a1 >= b1", [](const ParamMap& p) { return get(p, "a1") >= get(p, "b1"); }},
    {"a2 >= b2", [](const ParamMap& p) { return get(p, "a2") >= get(p, "b2"); }},
    {"a1 >= b2", [](const ParamMap& p) { return get(p, "a1") >= get(p, "b2"); }},
    {"a2 >= b1", [](const ParamMap& p) { return get(p, "a2") >= get(p, "b1"); }},
};

CatalogEntry two_patch_worst_entry() {
    CatalogEntry e;
    e.name = "two-patch-worst";
    e.summary = "two seasons; one-way migration to the currently worse patch";
    e.params = {{"a1", 1.0}, {"b1", -2.0}, {"a2", 2.0}, {"b2", -1.0}};
    e.domain = kTwoPatchDomain;
    e.build = [](const ParamMap& p) {
        return seasonal_model("two-patch-worst", kHalves, two_patch_growth(p),
                              {mat2(-1, 0, 1, 0), mat2(0, 1, 0, -1)});
    };
    e.oracles = [](const ParamMap& p) {
        const double a1 = get(p, "a1"), b1 = get(p, "b1"), a2 = get(p, "a2"), b2 = get(p, "b2");
        CatalogOracles o = two_patch_common(p);
        o.lambda_infT = 0.5 * (b1 + b2);
        o.lambda_large_m = o.lambda_infT;
        o.lambda_mInf = [a1, b1, a2, b2](double m) -> std::optional<double> {
            return 0.5 * (std::max(a1 - m, b2) + std::max(a2 - m, b1));
        };
        o.h3_expected = [a1, b1, a2, b2](double m) {
            // Non-simple spectrum exactly at the eigenvalue collisions.
            const double tol = 1e-9;
            if (std::abs(m - (a1 - b2)) <= tol || std::abs(m - (a2 - b1)) <= tol)
                return Verdict::Violated;
            return Verdict::VerifiedSampled;
        };
        o.h4_expected = Verdict::VerifiedSampled;
        return o;
    };
    return e;
}

CatalogEntry two_patch_best_entry() {
    CatalogEntry e;
    e.name = "two-patch-best";
    e.summary = "two seasons; one-way migration to the currently better patch";
    e.params = {{"a1", 1.0}, {"b1", -2.0}, {"a2", 2.0}, {"b2", -1.0}};
    e.domain = kTwoPatchDomain;
    e.build = [](const ParamMap& p) {
        return seasonal_model("two-patch-best", kHalves, two_patch_growth(p),
                              {mat2(0, 1, 0, -1), mat2(-1, 0, 1, 0)});
    };
    e.oracles = [](const ParamMap& p) {
        const double a1 = get(p, "a1"), b1 = get(p, "b1"), a2 = get(p, "a2"), b2 = get(p, "b2");
        CatalogOracles o = two_patch_common(p);
        o.lambda_infT = 0.5 * (a1 + a2);
        o.lambda_large_m = o.lambda_infT;
        o.lambda_mInf = [a1, b1, a2, b2](double m) -> std::optional<double> {
            return 0.5 * (std::max(a1, b2 - m) + std::max(a2, b1 - m));
        };
        o.h3_expected = [](double) { return Verdict::VerifiedSampled; };
        o.h4_expected = Verdict::VerifiedSampled;
        return o;
    };
    return e;
}

CatalogEntry two_patch_backflow_entry() {
    CatalogEntry e;
    e.name = "two-patch-backflow";
    e.summary = "one-way migration to the worse patch with a small backflow eps";
    e.params = {{"a", 1.0}, {"b", -0.5}, {"eps", 0.25}};
    e.domain = {
        {"a > b", [](const ParamMap& p) { return get(p, "a") > get(p, "b"); }},
        {"eps > 0", [](const ParamMap& p) { return get(p, "eps") > 0.0; }},
    };
    e.build = [](const ParamMap& p) {
        const double a = get(p, "a"), b = get(p, "b"), eps = get(p, "eps");
        return seasonal_model("two-patch-backflow", kHalves,
                              {diag2(a, b), diag2(b, a)},
                              {mat2(-1, eps, 1, -eps), mat2(-eps, 1, eps, -1)});
    };
    e.oracles = [](const ParamMap& p) {
        const double a = get(p, "a"), b = get(p, "b"), eps = get(p, "eps");
        CatalogOracles o;
        o.sigma = b;
        o.chi = a;
        o.lambda_0T = 0.5 * (a + b);
        o.lambda_00 = o.lambda_0T;
        o.lambda_inf0 = o.lambda_0T;
        o.lambda_m0 = [a, b](double) { return 0.5 * (a + b); };  // equal mean growth
        o.lambda_mInf = [a, b, eps](double m) -> std::optional<double> {
            // Both seasons carry the same 2x2 spectrum.
            const double tr = a + b - m * (1.0 + eps);
            const double disc = std::pow(a - b - m * (1.0 - eps), 2) + 4.0 * eps * m * m;
            return 0.5 * (tr + std::sqrt(disc));
        };
        o.lambda_infT = (b + eps * a) / (1.0 + eps);
        o.lambda_large_m = o.lambda_infT;
        o.lambda_0inf = o.chi;
        o.h3_expected = [](double) { return Verdict::VerifiedSampled; };
        o.h4_expected = Verdict::VerifiedSampled;
        return o;
    };
    return e;
}

// ---- three-patch symmetric-pair models ----

const std::vector<DomainPredicate> kThreePatchDomain = {
    {"a > b", [](const ParamMap& p) { return get(p, "a") > get(p, "b"); }},
};

CatalogOracles three_patch_common(const ParamMap& p) {
    const double a = get(p, "a"), b = get(p, "b");
    CatalogOracles o;
    o.sigma = b;
    o.chi = a;
    o.lambda_0T = (a + 2.0 * b) / 3.0;
    o.lambda_00 = o.lambda_0T;
    o.lambda_inf0 = o.lambda_0T;  // kernel vector of the averaged migration is uniform
    o.lambda_m0 = [a, b](double) { return (a + 2.0 * b) / 3.0; };
    return o;
}

CatalogEntry three_patch_worst_pair_entry() {
    CatalogEntry e;
    e.name = "three-patch-worst-pair";
    e.summary = "three seasons; symmetric migration between the two worse patches";
    e.params = {{"a", 1.0}, {"b", -1.0}};
    e.domain = kThreePatchDomain;
    e.build = [](const ParamMap& p) {
        const double a = get(p, "a"), b = get(p, "b");
        Matrix l1(3, 3);
        l1 << -1, 1, 0, 1, -1, 0, 0, 0, 0;
        return rotating_model("three-patch-worst-pair", diag3(b, b, a), l1, false);
    };
    e.oracles = [](const ParamMap& p) {
        const double a = get(p, "a"), b = get(p, "b");
        CatalogOracles o = three_patch_common(p);
        o.lambda_mInf = [](double) -> std::optional<double> { return std::nullopt; };
        o.h3_expected = [](double) { return Verdict::Violated; };
        o.h4_expected = Verdict::Violated;
        o.upper_bound = 0.5 * (a + b);
        o.lambda_large_m = 0.5 * (a + b);
        return o;
    };
    return e;
}

CatalogEntry three_patch_mixed_pair_entry() {
    CatalogEntry e;
    e.name = "three-patch-mixed-pair";
    e.summary = "three seasons; symmetric migration between the best and a worse patch";
    e.params = {{"a", 1.0}, {"b", -1.0}};
    e.domain = kThreePatchDomain;
    e.build = [](const ParamMap& p) {
        const double a = get(p, "a"), b = get(p, "b");
        Matrix l1(3, 3);
        l1 << -1, 1, 0, 1, -1, 0, 0, 0, 0;
        return rotating_model("three-patch-mixed-pair", diag3(a, b, b), l1, false);
    };
    e.oracles = [](const ParamMap& p) {
        const double a = get(p, "a"), b = get(p, "b");
        CatalogOracles o = three_patch_common(p);
        o.lambda_mInf = [a, b](double m) -> std::optional<double> {
            return 0.5 * (a + b - 2.0 * m + std::sqrt((a - b) * (a - b) + 4.0 * m * m));
        };
        o.lambda_0inf = a;
        o.h3_expected = [](double) { return Verdict::VerifiedSampled; };
        o.h4_expected = Verdict::Violated;
        return o;
    };
    return e;
}

// ---- three-patch one-way-cycle models ----
//
// One migration edge per season (1->2 first), rotating with the growth roles;
// the "-2" variants swap seasons 2 and 3. Families by the roles of the edge's
// endpoints in season 1: worse->worse, worse->best, best->worse.

Matrix cycle_edge_migration() {
    Matrix l = Matrix::Zero(3, 3);
    l(0, 0) = -1;
    l(1, 0) = 1;
    return l;
}

CatalogEntry cycle_entry(const std::string& name, const std::string& summary,
                         const Matrix& growth_pattern, bool swap_last_two,
                         std::function<void(const ParamMap&, CatalogOracles&)> specialize) {
    CatalogEntry e;
    e.name = name;
    e.summary = summary;
    e.params = {{"a", 1.0}, {"b", -1.0}};
    e.domain = kThreePatchDomain;
    e.build = [name, growth_pattern, swap_last_two](const ParamMap& p) {
        const double a = get(p, "a"), b = get(p, "b");
        Matrix growth1 = growth_pattern;
        for (int i = 0; i < 3; ++i) growth1(i, i) = growth_pattern(i, i) > 0 ? a : b;
        return rotating_model(name, growth1, cycle_edge_migration(), swap_last_two);
    };
    e.oracles = [specialize](const ParamMap& p) {
        CatalogOracles o = three_patch_common(p);
        o.h4_expected = Verdict::Violated;  // each season matrix has a double kernel
        o.lambda_mInf = [](double) -> std::optional<double> { return std::nullopt; };
        o.h3_expected = [](double) { return Verdict::Violated; };
        specialize(p, o);
        return o;
    };
    return e;
}

// growth_pattern diagonal: > 0 marks the best patch.
Matrix pattern(double p1, double p2, double p3) {
    return diag3(p1, p2, p3);
}

std::vector<CatalogEntry> build_catalog() {
    std::vector<CatalogEntry> entries;
    entries.push_back(two_patch_worst_entry());
    entries.push_back(two_patch_best_entry());
    entries.push_back(two_patch_backflow_entry());
    entries.push_back(three_patch_worst_pair_entry());
    entries.push_back(three_patch_mixed_pair_entry());

    entries.push_back(cycle_entry("cycle-b-to-b-1",
                                  "cycle; migration between the two worse patches each season",
                                  pattern(-1, -1, +1), false,
                                  [](const ParamMap&, CatalogOracles&) {}));
    entries.push_back(cycle_entry("cycle-b-to-b-2",
                                  "cycle; worse-to-worse migration, seasons 2 and 3 swapped",
                                  pattern(-1, -1, +1), true,
                                  [](const ParamMap&, CatalogOracles&) {}));
    entries.push_back(cycle_entry("cycle-b-to-a-1",
                                  "cycle; migration from a worse patch into the best patch",
                                  pattern(-1, +1, -1), false,
                                  [](const ParamMap&, CatalogOracles&) {}));
    entries.push_back(cycle_entry(
        "cycle-b-to-a-2", "cycle; worse-to-best migration, seasons 2 and 3 swapped",
        pattern(-1, +1, -1), true, [](const ParamMap& p, CatalogOracles& o) {
            const double a = get(p, "a");
            o.h3_expected = [](double) { return Verdict::VerifiedSampled; };
            o.lambda_mInf = [a](double) -> std::optional<double> { return a; };
            o.lambda_0inf = a;
        }));
    entries.push_back(cycle_entry("cycle-a-to-b-1",
                                  "cycle; migration from the best patch into a worse patch",
                                  pattern(+1, -1, -1), false,
                                  [](const ParamMap&, CatalogOracles&) {}));
    entries.push_back(cycle_entry(
        "cycle-a-to-b-2", "cycle; best-to-worse migration, seasons 2 and 3 swapped",
        pattern(+1, -1, -1), true, [](const ParamMap& p, CatalogOracles& o) {
            const double a = get(p, "a"), b = get(p, "b");
            o.h3_expected = [a, b](double m) {
                return m < a - b ? Verdict::VerifiedSampled : Verdict::Violated;
            };
            o.lambda_mInf = [a, b](double m) -> std::optional<double> {
                if (m < a - b) return a - m;
                return std::nullopt;
            };
            o.lambda_0inf = a;
        }));
    return entries;
}

}  // namespace

const std::vector<CatalogEntry>& catalog() {
    static const std::vector<CatalogEntry> entries = build_catalog();
    return entries;
}

const CatalogEntry* catalog_find(std::string_view name) {
    for (const auto& e : catalog())
        if (e.name == name) return &e;
    return nullptr;
}

ParamMap catalog_params(const CatalogEntry& entry, const ParamMap& overrides) {
    ParamMap out;
    for (const auto& spec : entry.params) out[spec.name] = spec.value;
    for (const auto& [key, value] : overrides) {
        if (!out.count(key))
            throw std::invalid_argument("model '" + entry.name + "' has no parameter '" + key +
                                        "'");
        out[key] = value;
    }
    return out;
}

void check_domain(const CatalogEntry& entry, const ParamMap& params) {
    for (const auto& pred : entry.domain)
        if (!pred.holds(params))
            throw std::invalid_argument("parameter binding violates the domain predicate '" +
                                        pred.description + "' of model '" + entry.name + "'");
}

PatchModel catalog_build(const CatalogEntry& entry, const ParamMap& overrides) {
    return entry.build(catalog_params(entry, overrides));
}

std::vector<OracleDiff> oracle_check(const CatalogEntry& entry, const ParamMap& binding, double m,
                                     const LimitReport& limits, const MonodromyResult* mono,
                                     const OracleTolerances& tol) {
    const ParamMap params = catalog_params(entry, binding);
    check_domain(entry, params);
    const CatalogOracles oracle = entry.oracles(params);

    std::vector<OracleDiff> rows;
    auto add = [&](const std::string& quantity, double expected, double computed, double bound) {
        OracleDiff d;
        d.quantity = quantity;
        d.expected = expected;
        d.computed = computed;
        d.abs_err = std::abs(expected - computed);
        d.rel_err = d.abs_err / std::max(1.0, std::abs(expected));
        d.pass = d.abs_err <= bound;
        rows.push_back(d);
    };

    add("sigma", oracle.sigma, limits.sigma, tol.formula_abs);
    add("chi", oracle.chi, limits.chi, tol.formula_abs);
    add("lambda(0,T)", oracle.lambda_0T, limits.lambda_0T, tol.formula_abs);
    add("lambda(m,0)", oracle.lambda_m0(m), limits.lambda_m0, tol.formula_abs);
    add("lambda(0,0)", oracle.lambda_00, limits.lambda_00, tol.formula_abs);
    add("lambda(inf,0)", oracle.lambda_inf0, limits.lambda_inf0, tol.formula_abs);

    const auto expected_mInf = oracle.lambda_mInf ? oracle.lambda_mInf(m) : std::nullopt;
    if (expected_mInf && limits.lambda_mInf.value)
        add("lambda(m,inf)", *expected_mInf, *limits.lambda_mInf.value, tol.formula_abs);
    else {
        OracleDiff d;
        d.quantity = "lambda(m,inf) availability";
        d.expected = expected_mInf.has_value();
        d.computed = limits.lambda_mInf.value.has_value() && !limits.lambda_mInf.forced;
        d.abs_err = std::abs(d.expected - d.computed);
        d.pass = d.abs_err == 0.0;
        rows.push_back(d);
    }
    if (oracle.lambda_infT && limits.lambda_infT.value)
        add("lambda(inf,T)", *oracle.lambda_infT, *limits.lambda_infT.value, tol.formula_abs);
    else {
        OracleDiff d;
        d.quantity = "lambda(inf,T) availability";
        d.expected = oracle.lambda_infT.has_value();
        d.computed = limits.lambda_infT.value.has_value() && !limits.lambda_infT.forced;
        d.abs_err = std::abs(d.expected - d.computed);
        d.pass = d.abs_err == 0.0;
        rows.push_back(d);
    }
    if (oracle.lambda_0inf && limits.lambda_0inf.value)
        add("lambda(0,inf)", *oracle.lambda_0inf, *limits.lambda_0inf.value, tol.formula_abs);

    {
        OracleDiff d;
        d.quantity = "H3 verdict";
        d.expected = static_cast<double>(oracle.h3_expected(m));
        d.computed = static_cast<double>(limits.h3.verdict);
        d.abs_err = std::abs(d.expected - d.computed);
        d.pass = d.abs_err == 0.0;
        rows.push_back(d);
        d.quantity = "H4 verdict";
        d.expected = static_cast<double>(oracle.h4_expected);
        d.computed = static_cast<double>(limits.h4.verdict);
        d.abs_err = std::abs(d.expected - d.computed);
        d.pass = d.abs_err == 0.0;
        rows.push_back(d);
    }

    if (mono) {
        if (oracle.upper_bound) {
            OracleDiff d;
            d.quantity = "Lambda <= upper bound";
            d.expected = *oracle.upper_bound;
            d.computed = mono->Lambda;
            d.abs_err = std::max(0.0, mono->Lambda - *oracle.upper_bound);
            d.pass = mono->Lambda <= *oracle.upper_bound + tol.bound_slack;
            rows.push_back(d);
        }
        OracleDiff lo;
        lo.quantity = "sigma <= Lambda <= chi";
        lo.expected = oracle.sigma;
        lo.computed = mono->Lambda;
        lo.pass = mono->Lambda >= oracle.sigma - tol.bound_slack &&
                  mono->Lambda <= oracle.chi + tol.bound_slack;
        rows.push_back(lo);
    }
    return rows;
}

}  // namespace patchlam
