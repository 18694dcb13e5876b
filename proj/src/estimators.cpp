#include "cace/estimators.hpp"

#include <cmath>
#include <limits>

#include "cace/error.hpp"

namespace cace {

namespace {

PointEstimate make_ratio(Estimator method, double tau_y, double tau_w) {
    PointEstimate p;
    p.method = method;
    p.tau_y_hat = tau_y;
    p.tau_w_hat = tau_w;
    p.abnormal = tau_w == 0.0;
    p.tau_hat = p.abnormal ? std::numeric_limits<double>::quiet_NaN() : tau_y / tau_w;
    return p;
}

}  // namespace

std::string_view to_string(Estimator e) noexcept { return e == Estimator::wald ? "wald" : "reg"; }

Eigen::VectorXd PotentialPopulation::y_potential(int z) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(n()));
    const auto& w = z ? w1 : w0;
    for (std::size_t i = 0; i < n(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        out[ii] = w[i] ? yw1[ii] : yw0[ii];
    }
    return out;
}

Eigen::VectorXd PotentialPopulation::w_potential(int z) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(n()));
    const auto& w = z ? w1 : w0;
    for (std::size_t i = 0; i < n(); ++i) out[static_cast<Eigen::Index>(i)] = w[i];
    return out;
}

Group classify(std::uint8_t w0, std::uint8_t w1) noexcept {
    if (w1 && !w0) return Group::complier;
    if (w1 && w0) return Group::always_taker;
    if (!w1 && !w0) return Group::never_taker;
    return Group::defier;
}

PointEstimate wald_estimate(const ExperimentData& data) {
    return make_ratio(Estimator::wald, difference_in_means(data.y(), data.z()),
                      difference_in_means(data.w(), data.z()));
}

PointEstimate reg_estimate(const ExperimentData& data, const LeastSquares& interacted) {
    return make_ratio(Estimator::reg, interacted.coefficients(data.y())[1], interacted.coefficients(data.w())[1]);
}

PointEstimate reg_estimate(const ExperimentData& data) {
    if (data.k() == 0) throw DataError("reg requires covariates (K = 0; use the Wald estimator)");
    // Within-arm checks first so the error names the arm rather than an interaction column.
    groupwise_projection_slope(data.y(), data.x(), data.z(), 1);
    groupwise_projection_slope(data.y(), data.x(), data.z(), 0);
    auto design = interacted_design(data);
    return reg_estimate(data, LeastSquares(design.matrix, std::move(design.columns)));
}

double true_sample_cace(const PotentialPopulation& pop) {
    double effect = 0.0;
    std::size_t compliers = 0;
    for (std::size_t i = 0; i < pop.n(); ++i) {
        switch (classify(pop.w0[i], pop.w1[i])) {
        case Group::defier:
            throw DataError("population contains a defier (unit " + std::to_string(i) + ")");
        case Group::complier: {
            const auto ii = static_cast<Eigen::Index>(i);
            effect += pop.yw1[ii] - pop.yw0[ii];
            ++compliers;
            break;
        }
        default:
            break;
        }
    }
    if (compliers == 0) throw DataError("population has no compliers");
    return effect / static_cast<double>(compliers);
}

}  // namespace cace
