#include "doctest.h"

#include <random>

#include "cace/error.hpp"
#include "cace/linalg.hpp"
#include "test_support.hpp"

using namespace cace;

TEST_CASE("ols: exact fit on the first design column") {
    Eigen::MatrixXd design(4, 2);
    design << 1, 0, 2, 1, 3, 0, 4, 1;
    const auto fit = ols(design.col(0), design);
    CHECK(fit.coefficients[0] == doctest::Approx(1.0));
    CHECK(std::abs(fit.coefficients[1]) < 1e-12);
    CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ols: response orthogonal to the design") {
    Eigen::MatrixXd design(4, 2);
    design << 1, 1, 1, -1, 1, 1, 1, -1;
    Eigen::VectorXd y(4);
    y << 1, 1, -1, -1;
    const auto fit = ols(y, design);
    CHECK(fit.coefficients.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ols: three points on a line") {
    // Normal equations by hand: [3 3; 3 5] b = [9; 13] -> b = (1, 2).
    Eigen::MatrixXd design(3, 2);
    design << 1, 0, 1, 1, 1, 2;
    Eigen::VectorXd y(3);
    y << 1, 3, 5;
    const auto fit = ols(y, design, {"intercept", "x"});
    CHECK(fit.coefficients[0] == doctest::Approx(1.0));
    CHECK(fit.coefficients[1] == doctest::Approx(2.0));
    CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
    CHECK(fit.design_columns[1] == "x");
}

TEST_CASE("ols: duplicated covariate is rank deficient and named") {
    Eigen::MatrixXd design(6, 3);
    design << 1, 0.5, 0.5, 1, 1.5, 1.5, 1, -2, -2, 1, 3, 3, 1, 0, 0, 1, 1, 1;
    try {
        ols(Eigen::VectorXd::Ones(6), design, {"intercept", "age", "age_copy"});
        FAIL("expected RankDeficiencyError");
    } catch (const RankDeficiencyError& e) {
        CHECK((e.column() == "age" || e.column() == "age_copy"));
    }
    CHECK_THROWS_AS(ols(Eigen::VectorXd::Ones(2), Eigen::MatrixXd::Ones(2, 3)), RankDeficiencyError);
}

TEST_CASE("property: OLS invariants on random designs") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::Index n = 8 + static_cast<Eigen::Index>(rng() % 60);
        const Eigen::Index p = 1 + static_cast<Eigen::Index>(rng() % 6);
        const Eigen::MatrixXd design = test::random_matrix(rng, n, p);
        const Eigen::VectorXd y = test::random_matrix(rng, n, 1).col(0) * 4.0;
        const auto fit = ols(y, design);

        // residuals orthogonal to every column
        const Eigen::VectorXd cross = design.transpose() * fit.residuals;
        CHECK(cross.cwiseAbs().maxCoeff() <= 1e-8 * static_cast<double>(n));
        // leverages in [0, 1], summing to the column count
        CHECK(fit.leverages.minCoeff() >= -1e-12);
        CHECK(fit.leverages.maxCoeff() <= 1.0 + 1e-12);
        CHECK(fit.leverages.sum() == doctest::Approx(static_cast<double>(p)).epsilon(1e-8));
        // reconstruction
        const Eigen::VectorXd back = design * fit.coefficients + fit.residuals;
        CHECK((back - y).cwiseAbs().maxCoeff() <= 1e-8 * std::max(1.0, y.cwiseAbs().maxCoeff()));
        // leverages agree with the explicit hat matrix diagonal
        const Eigen::MatrixXd hat = design * (design.transpose() * design).inverse() * design.transpose();
        CHECK((hat.diagonal() - fit.leverages).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("sandwich variance equals the explicit bread-meat-bread form") {
    std::mt19937_64 rng(99);
    const Eigen::Index n = 40, p = 5;
    const Eigen::MatrixXd design = test::random_matrix(rng, n, p);
    const Eigen::VectorXd y = test::random_matrix(rng, n, 1).col(0);
    const LeastSquares ls(design);
    const auto fit = ls.fit(y);
    const Eigen::MatrixXd bread = (design.transpose() * design).inverse();
    for (auto flavor : {HcFlavor::ehw, HcFlavor::hc2, HcFlavor::hc3}) {
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double h = fit.leverages[i];
            const double w = flavor == HcFlavor::ehw ? 1.0 : flavor == HcFlavor::hc2 ? 1.0 / (1 - h) : 1.0 / ((1 - h) * (1 - h));
            meat += w * fit.residuals[i] * fit.residuals[i] * design.row(i).transpose() * design.row(i);
        }
        const Eigen::MatrixXd v = bread * meat * bread;
        for (Eigen::Index j = 0; j < p; ++j)
            CHECK(ls.sandwich_variance(j, fit.residuals, flavor) == doctest::Approx(v(j, j)).epsilon(1e-10));
    }
}

TEST_CASE("sandwich: leverage one is a degenerate-leverage error") {
    // Unit 3 is the only one with a nonzero second column, so h_3 = 1.
    Eigen::MatrixXd design(5, 2);
    design << 1, 0, 1, 0, 1, 0, 1, 1, 1, 0;
    Eigen::VectorXd y(5);
    y << 1, 2, 3, 4, 6;
    const LeastSquares ls(design);
    const auto fit = ls.fit(y);
    CHECK(fit.leverages[3] == doctest::Approx(1.0));
    CHECK_NOTHROW(ls.sandwich_variance(0, fit.residuals, HcFlavor::ehw));
    try {
        ls.sandwich_variance(0, fit.residuals, HcFlavor::hc2);
        FAIL("expected DegenerateLeverageError");
    } catch (const DegenerateLeverageError& e) {
        CHECK(e.unit() == 3);
    }
}

TEST_CASE("groupwise_projection_slope") {
    std::mt19937_64 rng(7);
    SUBCASE("K = 0 gives an empty slope") {
        Assignment z{1, 1, 0, 0};
        CHECK(groupwise_projection_slope(Eigen::VectorXd::Ones(4), Eigen::MatrixXd(4, 0), z, 1).size() == 0);
    }
    SUBCASE("q equal to a covariate within the arm") {
        const auto x = test::random_matrix(rng, 12, 2);
        Assignment z(12, 0);
        for (int i = 0; i < 6; ++i) z[static_cast<std::size_t>(i)] = 1;
        Eigen::VectorXd q = Eigen::VectorXd::Constant(12, 9.0);
        for (int i = 0; i < 6; ++i) q[i] = x(i, 1);
        const auto slope = groupwise_projection_slope(q, x, z, 1);
        CHECK(std::abs(slope[0]) < 1e-10);
        CHECK(slope[1] == doctest::Approx(1.0));
    }
    SUBCASE("matches ols restricted to the arm rows") {
        const auto x = test::random_matrix(rng, 20, 2);
        const Eigen::VectorXd q = test::random_matrix(rng, 20, 1).col(0);
        Assignment z(20, 0);
        for (int i = 0; i < 10; ++i) z[static_cast<std::size_t>(2 * i)] = 1;
        Eigen::MatrixXd design(10, 3);
        Eigen::VectorXd qa(10);
        for (int r = 0; r < 10; ++r) {
            design.row(r) << 1.0, x(2 * r, 0), x(2 * r, 1);
            qa[r] = q[2 * r];
        }
        const Eigen::VectorXd oracle = ols(qa, design).coefficients.tail(2);
        const auto slope = groupwise_projection_slope(q, x, z, 1);
        CHECK((slope - oracle).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("too few units in the arm") {
        const auto x = test::random_matrix(rng, 8, 3);
        Assignment z{1, 1, 1, 1, 0, 0, 0, 0};
        CHECK_THROWS_AS(groupwise_projection_slope(Eigen::VectorXd::Ones(8), x, z, 0), RankDeficiencyError);
    }
}

TEST_CASE("interacted OLS: z coefficient equals the group-wise formula") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const auto d = test::random_dataset(rng, 20 + rng() % 50, 1 + rng() % 4);
        auto design = interacted_design(d);
        const auto fit = ols(d.y(), design.matrix, design.columns);
        CHECK(fit.design_columns[1] == "z");
        CHECK(test::groupwise_itt(d.y(), d) == doctest::Approx(fit.coefficients[1]).epsilon(1e-8).scale(1));
    }
}

TEST_CASE("interacted OLS: leverage equals the within-arm leverage") {
    std::mt19937_64 rng(41);
    const auto d = test::random_dataset(rng, 16, 2);
    auto design = interacted_design(d);
    const auto fit = ols(d.y(), design.matrix);
    for (int arm : {0, 1}) {
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < d.n(); ++i)
            if (d.z()[i] == arm) rows.push_back(static_cast<Eigen::Index>(i));
        const auto m = static_cast<Eigen::Index>(rows.size());
        Eigen::MatrixXd a(m, 3);
        for (Eigen::Index r = 0; r < m; ++r) a.row(r) << 1.0, d.x()(rows[r], 0), d.x()(rows[r], 1);
        const Eigen::MatrixXd hat = a * (a.transpose() * a).inverse() * a.transpose();
        for (Eigen::Index r = 0; r < m; ++r) CHECK(fit.leverages[rows[r]] == doctest::Approx(hat(r, r)).epsilon(1e-10));
    }
}
