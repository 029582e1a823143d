#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "catalog.hpp"
#include "oracles.hpp"
#include "path.hpp"

using namespace patchlam;

namespace {

Matrix mat2(double a, double b, double c, double d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

Matrix diag2(double a, double b) {
    return mat2(a, 0, 0, b);
}

}  // namespace

TEST_CASE("Rational parsing") {
    CHECK(Rational::parse("1/3").num == 1);
    CHECK(Rational::parse("1/3").den == 3);
    CHECK(Rational::parse("2/6").num == 1);  // reduced
    CHECK(Rational::parse("0.5").value() == 0.5);
    CHECK(Rational::parse("2").den == 1);
    CHECK(Rational::parse("1/3").value() == doctest::Approx(1.0 / 3).epsilon(1e-16));
    CHECK_THROWS(Rational::parse("1/0"));
}

TEST_CASE("merge_breakpoints unions the two sets") {
    auto path_with = [](std::vector<double> breaks) {
        std::vector<Matrix> mats(breaks.size(), Matrix::Zero(2, 2));
        return PiecewiseMatrixPath::piecewise_constant(std::move(breaks), std::move(mats));
    };
    CHECK(merge_breakpoints(path_with({0, 0.5}), path_with({0, 0.5})).breakpoints() ==
          std::vector<double>{0, 0.5});
    const auto merged =
        merge_breakpoints(path_with({0, 0.5}), path_with({0, 1.0 / 3, 2.0 / 3})).breakpoints();
    CHECK(merged == std::vector<double>{0, 1.0 / 3, 0.5, 2.0 / 3});

    const PatchModel worst = catalog_build(*catalog_find("two-patch-worst"));
    CHECK(merge_breakpoints(worst.growth, worst.migration).segment_count() == 2);

    CHECK_THROWS_AS(
        merge_breakpoints(path_with({0}),
                          PiecewiseMatrixPath::constant(Matrix::Zero(3, 3))),
        ParseError);
}

TEST_CASE("average: exact on constant segments") {
    const Matrix m = mat2(1, 2, 3, 4);
    CHECK((PiecewiseMatrixPath::constant(m).average() - m).cwiseAbs().maxCoeff() == 0.0);

    // Seasonal one-way pair averages to the symmetric generator.
    const PatchModel worst = catalog_build(*catalog_find("two-patch-worst"));
    const Matrix avg = worst.migration.average();
    CHECK((avg - 0.5 * mat2(-1, 1, 1, -1)).cwiseAbs().maxCoeff() < 1e-15);

    const PatchModel cyc = catalog_build(*catalog_find("cycle-b-to-b-1"));
    Matrix expect(3, 3);
    expect << -1, 0, 1, 1, -1, 0, 0, 1, -1;
    CHECK((cyc.migration.average() - expect / 3.0).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("average: Gauss-Legendre on smooth segments") {
    PiecewiseMatrixPath::Segment seg{MatrixFn([](double tau) {
                                         Matrix m(1, 1);
                                         m(0, 0) = std::sin(2 * M_PI * tau) + 0.25;
                                         return m;
                                     }),
                                     std::nullopt};
    PiecewiseMatrixPath path(1, {0.0}, {seg});
    CHECK(path.average()(0, 0) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("bind substitutes m and keeps column sums equal to the growth rates") {
    const PatchModel worst = catalog_build(*catalog_find("two-patch-worst"));
    {
        const PiecewiseMatrixPath a = bind(worst, {0.0, 1.0});
        CHECK((a.at(0.25) - diag2(1, -1)).cwiseAbs().maxCoeff() == 0.0);
    }
    {
        const PiecewiseMatrixPath a = bind(worst, {1.0, 1.0});
        CHECK((a.at(0.25) - mat2(0, 0, 1, -1)).cwiseAbs().maxCoeff() == 0.0);
    }
    const PiecewiseMatrixPath a = bind(worst, {2.5, 1.0});
    for (double tau : {0.0, 0.2, 0.5, 0.7, 0.99}) {
        const Matrix at = a.at(tau);
        CHECK(is_metzler(at));
        const Matrix r = worst.growth.at(tau);
        for (int j = 0; j < 2; ++j)
            CHECK(at.col(j).sum() == doctest::Approx(r(j, j)).epsilon(1e-12));
    }
}

TEST_CASE("averaging is linear in m") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const PatchModel model = testing::random_model(3, 2 + static_cast<int>(rng() % 2), rng);
        const double m = 0.5 + (rng() % 100) / 25.0;
        const Matrix lhs = bind(model, {m, 1.0}).average();
        const Matrix rhs = model.growth.average() + m * model.migration.average();
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("average is invariant under refining a constant segment") {
    const Matrix m1 = diag2(1, -1), m2 = diag2(-0.5, 0.25);
    const auto coarse = PiecewiseMatrixPath::piecewise_constant({0, 0.5}, {m1, m2});
    const auto refined =
        PiecewiseMatrixPath::piecewise_constant({0, 0.25, 0.5}, {m1, m1, m2});
    CHECK((coarse.average() - refined.average()).cwiseAbs().maxCoeff() < 1e-16);
}

TEST_CASE("evaluation is right-continuous; left limits wrap") {
    const auto path =
        PiecewiseMatrixPath::piecewise_constant({0, 0.5}, {diag2(1, 2), diag2(3, 4)});
    CHECK(path.at(0.5)(0, 0) == 3.0);
    CHECK(path.left_limit(0.5)(0, 0) == 1.0);
    CHECK(path.left_limit(0.0)(0, 0) == 3.0);  // limit from below at 0 is the last segment
    CHECK(path.left_limit(1.0)(0, 0) == 3.0);
    CHECK(path.at(1.25)(0, 0) == 1.0);  // periodic wrap
}

TEST_CASE("model validation reports the first violated invariant") {
    const auto growth = PiecewiseMatrixPath::constant(diag2(1, -1));
    CHECK_THROWS_WITH_AS(
        make_patch_model(growth, PiecewiseMatrixPath::constant(mat2(1, 0, -1, 0))),
        doctest::Contains("negative off-diagonal"), ParseError);
    CHECK_THROWS_WITH_AS(
        make_patch_model(growth, PiecewiseMatrixPath::constant(mat2(-1, 0, 0.5, 0))),
        doctest::Contains("sums to"), ParseError);
    CHECK_THROWS_WITH_AS(
        make_patch_model(PiecewiseMatrixPath::constant(mat2(1, 0.1, 0, -1)),
                         PiecewiseMatrixPath::constant(Matrix::Zero(2, 2))),
        doctest::Contains("off-diagonal"), ParseError);
    CHECK_THROWS(PiecewiseMatrixPath::piecewise_constant({0.1, 0.5},
                                                         {diag2(1, 1), diag2(1, 1)}));
    CHECK_THROWS(PiecewiseMatrixPath::piecewise_constant({0, 1.0},
                                                         {diag2(1, 1), diag2(1, 1)}));
}
