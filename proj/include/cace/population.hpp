#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace cace {

enum class Group : std::uint8_t { complier, never_taker, always_taker, defier };

/// Full science table of a finite population: covariates, potential outcomes
/// under each treatment received, latent indices and potential treatment
/// receipt. Fixed across randomizations.
struct PotentialPopulation {
    Eigen::MatrixXd x;     // n x K, centered
    Eigen::VectorXd yw0;   // outcome if not treated
    Eigen::VectorXd yw1;   // outcome if treated
    Eigen::VectorXd l0;    // latent index under control assignment
    Eigen::VectorXd l1;
    std::vector<std::uint8_t> w0;
    std::vector<std::uint8_t> w1;
    std::vector<Group> group;
    double true_tau_cace = 0.0;
    double true_p_co = 0.0;

    std::size_t n() const noexcept { return w0.size(); }

    /// Y(z): the outcome revealed under assignment z (exclusion restriction).
    Eigen::VectorXd y_potential(int z) const;
    Eigen::VectorXd w_potential(int z) const;
};

Group classify(std::uint8_t w0, std::uint8_t w1) noexcept;

}  // namespace cace
