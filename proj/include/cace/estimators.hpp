#pragma once

#include <string_view>

#include "cace/data.hpp"
#include "cace/linalg.hpp"
#include "cace/population.hpp"

namespace cace {

enum class Estimator { wald, reg };

std::string_view to_string(Estimator e) noexcept;

struct PointEstimate {
    Estimator method = Estimator::wald;
    double tau_hat = 0.0;    // NaN when abnormal
    double tau_w_hat = 0.0;  // estimated complier fraction
    double tau_y_hat = 0.0;  // ITT on the outcome
    bool abnormal = false;   // tau_w_hat == 0 exactly
};

/// Ratio of the outcome and treatment-received differences in means.
PointEstimate wald_estimate(const ExperimentData& data);

/// Ratio of the z-coefficients from OLS of y and of w on [1, z, x, z*x].
/// Requires K >= 1 (throws DataError otherwise) and full-rank designs.
PointEstimate reg_estimate(const ExperimentData& data);
PointEstimate reg_estimate(const ExperimentData& data, const LeastSquares& interacted);

/// Mean effect among compliers; throws DataError with no compliers or any defier.
double true_sample_cace(const PotentialPopulation& pop);

}  // namespace cace
