#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "cace/error.hpp"
#include "cace/intervals.hpp"
#include "test_support.hpp"

using namespace cace;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

ExperimentData make(Assignment z, std::vector<double> w, std::vector<double> y, Eigen::MatrixXd x = {}) {
    return ExperimentData::create(std::move(z), Eigen::Map<Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())),
                                  Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size())), std::move(x));
}

// Test-inversion form: |tau_y - beta tau_w| / sqrt((1/n1 + 1/n0) S2_{Y - beta W}) <= nu,
// with S2 over all n units, built from the raw moments.
bool inverted_test_accepts(const ExperimentData& d, double beta, double nu) {
    std::vector<double> y(d.y().data(), d.y().data() + d.n()), w(d.w().data(), d.w().data() + d.n());
    const double ty = test::mean_of(test::arm_values(d.y(), d.z(), 1)) - test::mean_of(test::arm_values(d.y(), d.z(), 0));
    const double tw = test::mean_of(test::arm_values(d.w(), d.z(), 1)) - test::mean_of(test::arm_values(d.w(), d.z(), 0));
    const double c = 1.0 / static_cast<double>(d.n1()) + 1.0 / static_cast<double>(d.n0());
    const double var = c * (test::cov_of(y, y) + beta * beta * test::cov_of(w, w) - 2.0 * beta * test::cov_of(y, w));
    const double stat = ty - beta * tw;
    return stat * stat <= nu * nu * var;
}

double distance_to_boundary(const ConfidenceSet& s, double beta) {
    double dist = inf;
    if (s.has_endpoints()) {
        if (std::isfinite(s.lower)) dist = std::min(dist, std::abs(beta - s.lower));
        if (std::isfinite(s.upper)) dist = std::min(dist, std::abs(beta - s.upper));
    }
    return dist;
}

}  // namespace

TEST_CASE("normal_quantile against high-precision values") {
    // reference digits from an arbitrary-precision inverse erf
    CHECK(std::abs(normal_quantile(0.975) - 1.95996398454005423552) < 1e-9);
    CHECK(std::abs(normal_quantile(0.9) - 1.28155156554460046697) < 1e-9);
    CHECK(std::abs(normal_quantile(1e-10) - -6.36134090240405620470) < 1e-9);
    CHECK(normal_quantile(0.5) == 0.0);
    // dyadic p keeps 1 - p exact
    for (double p : {0x1p-30, 0x1p-10, 0.015625, 0.125, 0.3125, 0.46875})
        CHECK(std::abs(normal_quantile(p) + normal_quantile(1.0 - p)) < 1e-12);
    CHECK_THROWS_AS(normal_quantile(0.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(1.0), std::invalid_argument);
    CHECK_THROWS_AS(normal_quantile(std::nan("")), std::invalid_argument);
}

TEST_CASE("solve_quadratic_leq: the four shapes") {
    auto s = solve_quadratic_leq(1, 0, -1);
    CHECK(s.shape == SetShape::interval);
    CHECK(s.lower == doctest::Approx(-1.0));
    CHECK(s.upper == doctest::Approx(1.0));

    CHECK(solve_quadratic_leq(-1, 0, -1).shape == SetShape::whole_line);

    s = solve_quadratic_leq(-1, 0, 1);
    CHECK(s.shape == SetShape::complement);
    CHECK(s.lower == doctest::Approx(-1.0));
    CHECK(s.upper == doctest::Approx(1.0));
    CHECK(s.covers(5.0));
    CHECK_FALSE(s.covers(0.0));

    s = solve_quadratic_leq(1, 0, 1);
    CHECK(s.shape == SetShape::empty);
    CHECK(s.length() == 0.0);
    CHECK_FALSE(s.covers(0.0));
}

TEST_CASE("solve_quadratic_leq: degenerate coefficients") {
    CHECK(solve_quadratic_leq(0, 0, -1).shape == SetShape::whole_line);
    CHECK(solve_quadratic_leq(0, 0, 0).shape == SetShape::whole_line);
    CHECK(solve_quadratic_leq(0, 0, 2).shape == SetShape::empty);

    // 2 beta - 4 <= 0: beta <= 2
    auto s = solve_quadratic_leq(0, 2, -4);
    CHECK(s.shape == SetShape::complement);
    CHECK(s.covers(-1e300));
    CHECK(s.covers(2.0));
    CHECK_FALSE(s.covers(2.5));
    CHECK(s.length() == inf);

    // (beta - 3)^2 <= 0: a single point
    s = solve_quadratic_leq(1, -6, 9);
    CHECK(s.shape == SetShape::interval);
    CHECK(s.lower == doctest::Approx(3.0));
    CHECK(s.upper == s.lower);

    // -(beta - 3)^2 <= 0: everything, recorded as a point complement
    s = solve_quadratic_leq(-1, 6, -9);
    CHECK(s.shape == SetShape::complement);
    CHECK(s.covers(3.0));
    CHECK(s.covers(-7.0));
}

TEST_CASE("solve_quadratic_leq: roots are stable under cancellation") {
    // roots 1e-8 and 1e8
    const auto s = solve_quadratic_leq(1, -(1e8 + 1e-8), 1);
    REQUIRE(s.shape == SetShape::interval);
    CHECK(s.lower == doctest::Approx(1e-8).epsilon(1e-12));
    CHECK(s.upper == doctest::Approx(1e8).epsilon(1e-12));
}

TEST_CASE("wald_ld_set: data-driven shapes") {
    SUBCASE("constant w with a strong outcome contrast is empty") {
        const auto r = wald_ld_set(make({1, 1, 1, 0, 0, 0}, {0, 0, 0, 0, 0, 0}, {10, 10.1, 9.9, 0, 0.1, -0.1}));
        CHECK(r.set.shape == SetShape::empty);
        CHECK(r.abnormal);
    }
    SUBCASE("no first stage is the whole line") {
        const auto r = wald_ld_set(make({1, 1, 1, 0, 0, 0}, {1, 0, 0, 0, 1, 0}, {1, 3, 2, 2, 1, 3}));
        CHECK(r.set.shape == SetShape::whole_line);
        CHECK(r.abnormal);
    }
    SUBCASE("weak first stage with a clear outcome effect is a complement") {
        const auto r = wald_ld_set(make({1, 1, 1, 1, 0, 0, 0, 0}, {1, 1, 1, 0, 0, 0, 1, 0}, {5, 6, 5.5, 0, 0.2, 0.1, -0.1, 0}));
        CHECK(r.set.shape == SetShape::complement);
        CHECK(r.abnormal);
        CHECK(r.set.covers(r.point.tau_hat));
    }
    SUBCASE("perfect compliance with a clear effect is a finite interval") {
        const auto d = load_csv(std::string(CACE_FIXTURE_DIR) + "/perfect_compliance.csv");
        const auto r = wald_ld_set(d);
        REQUIRE(r.set.shape == SetShape::interval);
        CHECK_FALSE(r.abnormal);
        CHECK(r.set.covers(r.point.tau_hat));
        // dense grid on [-50, 50], step 1e-3
        const double nu = normal_quantile(0.975);
        int mismatches = 0;
        for (int i = -50000; i <= 50000; ++i) {
            const double beta = i * 1e-3;
            if (r.set.covers(beta) != inverted_test_accepts(d, beta, nu) && distance_to_boundary(r.set, beta) > 1e-9)
                ++mismatches;
        }
        CHECK(mismatches == 0);
    }
}

TEST_CASE("wald_ld_set: grid membership equals the inverted test") {
    std::mt19937_64 rng(4242);
    const double nu = normal_quantile(0.975);
    for (int trial = 0; trial < 30; ++trial) {
        const auto d = test::random_dataset(rng, 12 + rng() % 100, 0, 0.15 + 0.05 * static_cast<double>(trial % 10));
        const auto r = wald_ld_set(d);
        const double centre = std::isfinite(r.point.tau_hat) ? r.point.tau_hat : 0.0;
        int mismatches = 0;
        for (int i = 0; i < 10000; ++i) {
            const double beta = centre + (i - 5000) * 2e-3 * (1 + trial % 4);
            if (r.set.covers(beta) != inverted_test_accepts(d, beta, nu) && distance_to_boundary(r.set, beta) > 1e-9)
                ++mismatches;
        }
        CHECK(mismatches == 0);
    }
}

TEST_CASE("wald_delta_interval equals the delta-method interval") {
    std::mt19937_64 rng(17);
    const double nu = normal_quantile(0.975);
    int compared = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = test::random_dataset(rng, 10 + rng() % 191, 0);
        const auto r = wald_delta_interval(d);
        if (r.abnormal) continue;
        const auto oracle = test::delta_method_interval(d, nu);
        CHECK(std::abs(r.set.lower - oracle.lower) <= 1e-10);
        CHECK(std::abs(r.set.upper - oracle.upper) <= 1e-10);
        ++compared;
    }
    CHECK(compared >= 90);
}

TEST_CASE("wald_delta_interval: n = 8 worked case") {
    const auto d = make({1, 1, 1, 1, 0, 0, 0, 0}, {1, 1, 0, 1, 0, 1, 0, 0}, {4, 2.5, 1, 3, 0.5, 2, -1, 1});
    const auto r = wald_delta_interval(d);
    const auto oracle = test::delta_method_interval(d, normal_quantile(0.975));
    CHECK(std::abs(r.set.lower - oracle.lower) <= 1e-10);
    CHECK(std::abs(r.set.upper - oracle.upper) <= 1e-10);
}

TEST_CASE("wald_delta_interval: zero width when y is proportional to w") {
    const auto r = wald_delta_interval(make({1, 1, 1, 0, 0, 0}, {1, 1, 0, 0, 1, 0}, {2, 2, 0, 0, 2, 0}));
    CHECK(r.point.tau_hat == doctest::Approx(2.0));
    CHECK(r.set.lower == doctest::Approx(2.0));
    CHECK(r.set.upper == doctest::Approx(2.0));
    CHECK(r.variance_numerator == doctest::Approx(0.0));
}

TEST_CASE("wald_delta_interval: perfect compliance is the Neyman interval") {
    // diff = 3.25 - 0.65 = 2.6; S2 = 4.5/4 = 1.125 and 5.7/4 = 1.425 over n = 5 each
    const auto d = load_csv(std::string(CACE_FIXTURE_DIR) + "/perfect_compliance.csv");
    const auto r = wald_delta_interval(d);
    CHECK(r.point.tau_hat == doctest::Approx(2.6).epsilon(1e-14));
    CHECK(std::abs(r.set.lower - 0.7303135217818866) < 1e-12);
    CHECK(std::abs(r.set.upper - 4.469686478218113) < 1e-12);
}

TEST_CASE("wald_delta_interval: abnormal point estimate yields no interval") {
    const auto r = wald_delta_interval(make({1, 1, 1, 0, 0, 0}, {1, 1, 0, 0, 1, 1}, {1, 2, 3, 4, 5, 6}));
    CHECK(r.abnormal);
    CHECK_FALSE(r.set.has_endpoints());
}

TEST_CASE("reg intervals: zero residuals give zero width") {
    Eigen::MatrixXd x(8, 1);
    x << 0.3, -1, 2, 0.5, -0.7, 1.1, 0.2, -2.1;
    Eigen::VectorXd w(8);
    w << 1, 1, 0, 1, 0, 1, 0, 0;
    Eigen::VectorXd y = 2.0 * w + 3.0 * x.col(0);
    const auto d = ExperimentData::create({1, 1, 1, 1, 0, 0, 0, 0}, w, y, x);
    for (auto f : {HcFlavor::ehw, HcFlavor::hc2, HcFlavor::hc3}) {
        const auto r = reg_interval(d, 0.05, f);
        CHECK(r.point.tau_hat == doctest::Approx(2.0));
        CHECK(r.set.length() == doctest::Approx(0.0).scale(1e-6));
    }
}

TEST_CASE("reg intervals: width ordering EHW <= HC2 <= HC3") {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 100; ++trial) {
        const auto d = test::random_dataset(rng, 20 + rng() % 100, 1 + rng() % 4);
        const LeastSquares ls(interacted_design(d).matrix);
        const auto r = reg_intervals(d, 0.05, ls);
        if (r[0].abnormal) continue;
        CHECK(r[0].set.length() <= r[1].set.length() * (1 + 1e-12));
        CHECK(r[1].set.length() <= r[2].set.length() * (1 + 1e-12));
        for (const auto& rep : r) {
            CHECK(rep.set.lower + rep.set.upper == doctest::Approx(2.0 * rep.point.tau_hat));
        }
        CHECK(reg_interval(d, 0.05, HcFlavor::hc2).set.upper == doctest::Approx(r[1].set.upper).epsilon(1e-12));
    }
}

TEST_CASE("property: shift and scale of y") {
    std::mt19937_64 rng(91);
    for (int trial = 0; trial < 40; ++trial) {
        const auto d = test::random_dataset(rng, 60, 2);
        const double a = 0.25 + 4.0 * std::uniform_real_distribution<double>()(rng);
        const double b = 50.0 * std::normal_distribution<double>()(rng);
        const auto shifted = d.with_outcome(d.y().array() + b);
        const auto scaled = d.with_outcome(a * d.y());
        for (auto m : all_interval_methods) {
            const auto base = compute_interval(d, m);
            if (!base.set.has_endpoints()) continue;
            const auto s = compute_interval(shifted, m);
            const auto t = compute_interval(scaled, m);
            REQUIRE(s.set.shape == base.set.shape);
            REQUIRE(t.set.shape == base.set.shape);
            CHECK(s.set.lower == doctest::Approx(base.set.lower).epsilon(1e-6));
            CHECK(s.set.upper == doctest::Approx(base.set.upper).epsilon(1e-6));
            CHECK(t.set.lower == doctest::Approx(a * base.set.lower).epsilon(1e-9));
            CHECK(t.set.upper == doctest::Approx(a * base.set.upper).epsilon(1e-9));
        }
    }
}

TEST_CASE("alpha is validated and widens intervals as it shrinks") {
    std::mt19937_64 rng(3);
    const auto d = test::random_dataset(rng, 80, 1);
    CHECK(wald_delta_interval(d, 0.01).set.length() > wald_delta_interval(d, 0.10).set.length());
    CHECK_THROWS(wald_delta_interval(d, 0.0));
    CHECK_THROWS(wald_ld_set(d, 1.0));
}

TEST_CASE("method names round-trip") {
    for (auto m : all_interval_methods) CHECK(parse_interval_method(to_string(m)) == m);
    CHECK_FALSE(parse_interval_method("wald").has_value());
    CHECK(display_name(IntervalMethod::reg_hc2) == "Reg-HC2");
}
