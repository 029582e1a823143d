// Exercises the shared-library C API surface only (no core headers).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "patchlam/patchlam.h"

namespace {

struct Str {
    char* p = nullptr;
    ~Str() { pl_string_free(p); }
    std::string s() const { return p ? p : ""; }
};

pl_model* worst() {
    pl_model* model = nullptr;
    REQUIRE(pl_model_from_catalog("two-patch-worst", nullptr, nullptr, 0, &model) == PL_OK);
    return model;
}

}  // namespace

TEST_CASE("version and catalog discovery") {
    CHECK(std::strlen(pl_version()) > 0);
    CHECK(pl_catalog_count() == 11);
    bool found = false;
    for (size_t i = 0; i < pl_catalog_count(); ++i)
        if (std::string(pl_catalog_name(i)) == "three-patch-mixed-pair") found = true;
    CHECK(found);
    CHECK(pl_catalog_param_count("two-patch-worst") == 4);
    const char* pname = nullptr;
    double pdefault = 0;
    REQUIRE(pl_catalog_param("two-patch-worst", 0, &pname, &pdefault) == PL_OK);
    CHECK(std::string(pname) == "a1");
    CHECK(pdefault == 1.0);
}

TEST_CASE("model lifecycle: build, serialize, reload") {
    pl_model* model = worst();
    CHECK(pl_model_patch_count(model) == 2);
    Str json;
    REQUIRE(pl_model_to_json(model, &json.p) == PL_OK);
    pl_model* reloaded = nullptr;
    REQUIRE(pl_model_load_string(json.p, &reloaded) == PL_OK);
    CHECK(pl_model_patch_count(reloaded) == 2);
    pl_model_free(reloaded);
    pl_model_free(model);
}

TEST_CASE("catalog parameters can be overridden") {
    const char* names[] = {"b"};
    const double values[] = {-0.8};
    pl_model* model = nullptr;
    REQUIRE(pl_model_from_catalog("three-patch-worst-pair", names, values, 1, &model) == PL_OK);
    double rbar[3];
    int labels[3];
    double sigma = 0, chi = 0;
    REQUIRE(pl_classify(model, rbar, labels, &sigma, &chi) == PL_OK);
    for (int i = 0; i < 3; ++i) {
        CHECK(rbar[i] == doctest::Approx(-0.2));
        CHECK(labels[i] == -1);
    }
    CHECK(chi == doctest::Approx(1.0));
    pl_model_free(model);
}

TEST_CASE("growth rate evaluation") {
    pl_model* model = worst();
    pl_growth_result r{};
    std::vector<double> pi(2);
    REQUIRE(pl_growth_rate(model, 1.0, 1.0, &r, pi.data()) == PL_OK);
    CHECK(r.lambda == doctest::Approx(0.214255440481).epsilon(1e-9));
    CHECK(r.sigma == doctest::Approx(-1.5));
    CHECK(r.chi == doctest::Approx(1.5));
    CHECK(pi[0] + pi[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_FALSE(r.decoupled);

    REQUIRE(pl_growth_rate(model, 0.0, 1.0, &r, nullptr) == PL_OK);
    CHECK(r.decoupled);
    CHECK(r.lambda == doctest::Approx(0.5));
    pl_model_free(model);
}

TEST_CASE("limits with gating flags") {
    pl_model* model = nullptr;
    REQUIRE(pl_model_from_catalog("three-patch-mixed-pair", nullptr, nullptr, 0, &model) == PL_OK);
    pl_limit_result r{};
    Str text;
    REQUIRE(pl_limits(model, 1.0, 0, &r, &text.p) == PL_OK);
    CHECK(r.has_mInf);
    CHECK(r.lambda_mInf == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-10));
    CHECK_FALSE(r.has_infT);
    CHECK(r.h3 == PL_VERIFIED_SAMPLED);
    CHECK(r.h4 == PL_VIOLATED);
    CHECK(text.s().find("lambda(m,inf)") != std::string::npos);
    pl_model_free(model);

    // Forced evaluation on a model whose H3 fails.
    pl_model* pair = nullptr;
    REQUIRE(pl_model_from_catalog("three-patch-worst-pair", nullptr, nullptr, 0, &pair) == PL_OK);
    pl_limit_result gated{}, forced{};
    REQUIRE(pl_limits(pair, 1.0, 0, &gated, nullptr) == PL_OK);
    CHECK_FALSE(gated.has_mInf);
    REQUIRE(pl_limits(pair, 1.0, 1, &forced, nullptr) == PL_OK);
    CHECK(forced.has_mInf);
    CHECK(forced.mInf_forced);
    pl_model_free(pair);
}

TEST_CASE("hypothesis checks through the C surface") {
    pl_model* model = nullptr;
    REQUIRE(pl_model_from_catalog("three-patch-worst-pair", nullptr, nullptr, 0, &model) == PL_OK);
    pl_check_result r{};
    Str text;
    REQUIRE(pl_check(model, 3, 1.0, nullptr, &r, &text.p) == PL_OK);
    CHECK(r.verdict == PL_VIOLATED);
    CHECK(r.witness_count >= 3);
    CHECK(text.s().find("witness[0]") != std::string::npos);
    REQUIRE(pl_check(model, 2, 0.0, nullptr, &r, nullptr) == PL_OK);
    CHECK(r.verdict == PL_VERIFIED_SAMPLED);
    CHECK(pl_check(model, 7, 1.0, nullptr, &r, nullptr) == PL_ERROR_ARGUMENT);
    pl_model_free(model);
}

TEST_CASE("sweep CSV is deterministic and parallel-safe") {
    pl_model* model = worst();
    const double ms[] = {0.5, 1.0, 2.0};
    const double Ts[] = {0.5, 1.0};
    Str a, b, c;
    REQUIRE(pl_sweep_csv(model, ms, 3, Ts, 2, 1, &a.p) == PL_OK);
    REQUIRE(pl_sweep_csv(model, ms, 3, Ts, 2, 1, &b.p) == PL_OK);
    REQUIRE(pl_sweep_csv(model, ms, 3, Ts, 2, 3, &c.p) == PL_OK);
    const std::string csv = a.s();
    CHECK(csv == b.s());
    CHECK(csv == c.s());
    CHECK(csv.rfind("m,T,lambda,mu,decoupled\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + 6 rows

    // Sweeps may include the m = 0 column; rows are flagged decoupled.
    const double with_zero[] = {0.0, 1.0};
    Str z;
    REQUIRE(pl_sweep_csv(model, with_zero, 2, Ts, 2, 1, &z.p) == PL_OK);
    CHECK(z.s().find(",1\n") != std::string::npos);
    pl_model_free(model);
}

TEST_CASE("trajectory CSV") {
    pl_model* model = worst();
    const double x0[] = {0.5, 0.5};
    Str csv;
    REQUIRE(pl_trajectory_csv(model, 1.0, 1.0, x0, 2, 5, &csv.p) == PL_OK);
    const std::string text = csv.s();
    CHECK(text.rfind("t,x1,x2,log_norm\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 6);
    pl_model_free(model);
}

TEST_CASE("dig and did scans") {
    {
        const char* names[] = {"b"};
        const double values[] = {-0.8};
        pl_model* model = nullptr;
        REQUIRE(pl_model_from_catalog("three-patch-worst-pair", names, values, 1, &model) ==
                PL_OK);
        const double ms[] = {0.01, 0.1, 1.0, 10.0, 100.0, 1000.0};
        pl_phenomenon_result r{};
        REQUIRE(pl_dig_scan(model, ms, 6, ms, 6, nullptr, &r, nullptr) == PL_OK);
        CHECK(r.has_witness);
        CHECK(r.feasible == PL_FOUND_NUMERICALLY);
        CHECK(r.definition_holds);
        pl_model_free(model);
    }
    {
        pl_model* growth_only = nullptr;
        REQUIRE(pl_model_load_string(R"({
            "n": 2, "breakpoints": [0, "1/2"],
            "segments": [ {"r": [2, -1]}, {"r": [-1, 2]} ]
        })",
                                     &growth_only) == PL_OK);
        const double grid[] = {0.1, 1.0, 10.0, 100.0};
        pl_phenomenon_result r{};
        Str constructed, report;
        REQUIRE(pl_did_scan(growth_only, grid, 4, grid, 4, 1e-3, nullptr, &r, &constructed.p,
                            &report.p) == PL_OK);
        CHECK(r.feasible == PL_THEORY_CERTAIN);
        CHECK(r.has_witness);
        CHECK(r.witness_lambda < 0);
        REQUIRE(constructed.p != nullptr);
        pl_model* built = nullptr;
        REQUIRE(pl_model_load_string(constructed.p, &built) == PL_OK);
        CHECK(pl_model_patch_count(built) == 2);
        pl_model_free(built);
        pl_model_free(growth_only);
    }
}

TEST_CASE("error mapping and messages") {
    pl_model* model = nullptr;
    CHECK(pl_model_load_string("not json", &model) == PL_ERROR_PARSE);
    CHECK(std::strlen(pl_last_error()) > 0);
    CHECK(pl_model_from_catalog("nope", nullptr, nullptr, 0, &model) == PL_ERROR_NOT_FOUND);
    const char* bad_param[] = {"zz"};
    const double v[] = {1.0};
    CHECK(pl_model_from_catalog("two-patch-worst", bad_param, v, 1, &model) == PL_ERROR_ARGUMENT);

    // Reducible migration: hypothesis failure code.
    pl_model* one_way = nullptr;
    REQUIRE(pl_model_load_string(R"({
        "n": 2, "breakpoints": [0],
        "segments": [ {"r": [1, -1], "L": [[-1, 0], [1, 0]]} ]
    })",
                                 &one_way) == PL_OK);
    pl_growth_result r{};
    CHECK(pl_growth_rate(one_way, 1.0, 1.0, &r, nullptr) == PL_ERROR_HYPOTHESIS);
    pl_model_free(one_way);
}
