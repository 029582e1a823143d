#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "catalog.hpp"
#include "limits.hpp"
#include "monodromy.hpp"
#include "simplex.hpp"

using namespace patchlam;

TEST_CASE("the catalog carries the eleven built-in models") {
    CHECK(catalog().size() == 11);
    for (const char* name :
         {"two-patch-worst", "two-patch-best", "two-patch-backflow", "three-patch-worst-pair",
          "three-patch-mixed-pair", "cycle-b-to-b-1", "cycle-b-to-b-2", "cycle-b-to-a-1",
          "cycle-b-to-a-2", "cycle-a-to-b-1", "cycle-a-to-b-2"})
        CHECK(catalog_find(name) != nullptr);
    CHECK(catalog_find("no-such-model") == nullptr);
}

TEST_CASE("every entry builds a structurally valid model satisfying H2") {
    for (const auto& entry : catalog()) {
        const PatchModel model = catalog_build(entry);
        CHECK(model.dim() >= 2);
        CHECK(is_irreducible(model.migration.average(), 1e-12));
        CHECK(model.name == entry.name);
        // Breakpoint rationals recorded for exact file round-trips.
        CHECK(model.growth_breaks_exact.size() ==
              static_cast<size_t>(model.growth.segment_count()));
    }
}

TEST_CASE("named oracle spot values") {
    {
        const auto* e = catalog_find("three-patch-mixed-pair");
        const auto oracle = e->oracles(catalog_params(*e));
        const auto v = oracle.lambda_mInf(1.0);
        REQUIRE(v);
        CHECK(*v == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-15));
    }
    {
        const auto* e = catalog_find("cycle-b-to-a-2");
        const auto oracle = e->oracles(catalog_params(*e));
        for (double m : {0.3, 1.0, 7.0}) {
            const auto v = oracle.lambda_mInf(m);
            REQUIRE(v);
            CHECK(*v == doctest::Approx(1.0));
        }
    }
    {
        const auto* e = catalog_find("two-patch-worst");
        const auto oracle = e->oracles(catalog_params(*e));
        REQUIRE(oracle.lambda_infT);
        CHECK(*oracle.lambda_infT == doctest::Approx(-1.5));
        // Piecewise large-T closed form across the three regimes.
        CHECK(*oracle.lambda_mInf(1.0) == doctest::Approx(0.5));
        CHECK(*oracle.lambda_mInf(3.0) == doctest::Approx(-1.0));
        CHECK(*oracle.lambda_mInf(5.0) == doctest::Approx(-1.5));
    }
}

TEST_CASE("oracle_check passes on defaults and enforces domain predicates") {
    {
        const auto* e = catalog_find("two-patch-worst");
        const LimitReport limits = limit_report(catalog_build(*e), 1.0);
        const MonodromyResult mono = growth_rate(catalog_build(*e), {1.0, 1.0});
        const auto rows = oracle_check(*e, {}, 1.0, limits, &mono);
        for (const auto& row : rows) {
            INFO(row.quantity, " expected=", row.expected, " computed=", row.computed);
            CHECK(row.pass);
        }
    }
    {
        // Inequality oracle on the worst-pair model.
        const auto* e = catalog_find("three-patch-worst-pair");
        const LimitReport limits = limit_report(catalog_build(*e), 1.0);
        const MonodromyResult mono = growth_rate(catalog_build(*e), {1.0, 1.0});
        const auto rows = oracle_check(*e, {}, 1.0, limits, &mono);
        bool saw_bound = false;
        for (const auto& row : rows) {
            INFO(row.quantity, " expected=", row.expected, " computed=", row.computed);
            CHECK(row.pass);
            saw_bound = saw_bound || row.quantity == "Lambda <= upper bound";
        }
        CHECK(saw_bound);
    }
    {
        // Degenerate binding a == b collapses everything onto rbar.
        const auto* e = catalog_find("two-patch-worst");
        const ParamMap binding{{"a1", 1.0}, {"b1", 1.0}, {"a2", 1.0}, {"b2", 1.0}};
        const PatchModel model = catalog_build(*e, binding);
        const LimitReport limits = limit_report(model, 1.0);
        CHECK(limits.sigma == doctest::Approx(1.0));
        CHECK(limits.chi == doctest::Approx(1.0));
        const auto rows = oracle_check(*e, binding, 1.0, limits);
        for (const auto& row : rows) {
            INFO(row.quantity);
            CHECK(row.pass);
        }
    }
    CHECK_THROWS_WITH_AS(
        oracle_check(*catalog_find("two-patch-worst"),
                     ParamMap{{"a1", -3.0}}, 1.0,
                     limit_report(catalog_build(*catalog_find("two-patch-worst")), 1.0)),
        doctest::Contains("a1 >= b1"), std::invalid_argument);
    CHECK_THROWS_AS(catalog_params(*catalog_find("two-patch-worst"), ParamMap{{"zz", 1.0}}),
                    std::invalid_argument);
}

TEST_CASE("oracle formulas agree with the numerical pipeline at random in-domain bindings") {
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int bindings_checked = 0;

    while (bindings_checked < 50) {
        for (const auto& entry : catalog()) {
            ParamMap params = catalog_params(entry);
            if (params.count("a1")) {
                // Draw b's below the a's so every predicate holds.
                params["a1"] = 0.3 + 1.5 * unit(rng);
                params["a2"] = 0.3 + 1.5 * unit(rng);
                const double cap = std::min(params["a1"], params["a2"]);
                params["b1"] = cap - 0.2 - 1.5 * unit(rng);
                params["b2"] = cap - 0.2 - 1.5 * unit(rng);
            } else {
                params["a"] = 0.3 + 1.2 * unit(rng);
                params["b"] = params["a"] - 0.3 - 1.5 * unit(rng);
                if (params.count("eps")) params["eps"] = 0.05 + 0.9 * unit(rng);
            }
            check_domain(entry, params);
            const double m = 0.15 + 4.0 * unit(rng);
            const PatchModel model = entry.build(params);
            const CatalogOracles oracle = entry.oracles(params);

            const auto [sigma, chi] = sigma_chi(model);
            CHECK(std::abs(sigma - oracle.sigma) < 1e-10);
            CHECK(std::abs(chi - oracle.chi) < 1e-10);
            CHECK(std::abs(lambda_m_to_0(model) - oracle.lambda_0T) < 1e-10);
            CHECK(std::abs(lambda_T_to_0(model, m) - oracle.lambda_m0(m)) < 1e-10);
            if (const auto v = oracle.lambda_mInf(m))
                CHECK(std::abs(lambda_T_to_inf_formula(model, m) - *v) < 1e-10);
            if (oracle.lambda_infT)
                CHECK(std::abs(lambda_m_to_inf_formula(model) - *oracle.lambda_infT) < 1e-10);
            ++bindings_checked;
        }
    }
}

TEST_CASE("expected hypothesis verdicts hold at an off-default binding") {
    const auto* e = catalog_find("cycle-a-to-b-2");
    const ParamMap params = catalog_params(*e, {{"a", 0.5}, {"b", -0.75}});
    const PatchModel model = e->build(params);
    const auto oracle = e->oracles(params);
    // a - b = 1.25: verified below, violated above.
    CHECK(oracle.h3_expected(1.0) == Verdict::VerifiedSampled);
    CHECK(check_h3(model, 1.0).verdict == Verdict::VerifiedSampled);
    CHECK(oracle.h3_expected(2.0) == Verdict::Violated);
    CHECK(check_h3(model, 2.0).verdict == Verdict::Violated);
}
