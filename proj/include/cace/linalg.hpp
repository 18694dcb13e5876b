#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cace/data.hpp"

namespace cace {

/// Residual weighting of the heteroskedasticity-robust sandwich.
enum class HcFlavor { ehw, hc2, hc3 };

struct OlsFit {
    Eigen::VectorXd coefficients;  // intercept first when the design has one
    Eigen::VectorXd residuals;
    Eigen::VectorXd leverages;
    std::vector<std::string> design_columns;
};

/// Column-pivoted QR of a fixed design, reusable across responses.
///
/// Construction fails with RankDeficiencyError when the smallest-to-largest
/// pivot ratio of R is below 1e-10, naming the first dependent column.
class LeastSquares {
public:
    static constexpr double rank_tolerance = 1e-10;

    LeastSquares(const Eigen::MatrixXd& design, std::vector<std::string> columns = {});

    Eigen::Index rows() const noexcept { return projector_.cols(); }
    Eigen::Index cols() const noexcept { return projector_.rows(); }
    const std::vector<std::string>& columns() const noexcept { return columns_; }

    Eigen::VectorXd coefficients(const Eigen::VectorXd& response) const { return projector_ * response; }
    /// Hat-matrix diagonal, from the thin orthogonal factor.
    const Eigen::VectorXd& leverages() const noexcept { return leverages_; }

    OlsFit fit(const Eigen::VectorXd& response) const;

    /// Diagonal entry `coef` of (X'X)^-1 (sum_i w_i u_i^2 x_i x_i') (X'X)^-1, where
    /// w_i is 1, 1/(1-h_i) or 1/(1-h_i)^2. Throws DegenerateLeverageError when
    /// HC2/HC3 meets h_i > 1 - 1e-12.
    double sandwich_variance(Eigen::Index coef, const Eigen::VectorXd& residuals, HcFlavor flavor) const;

private:
    Eigen::MatrixXd design_;
    Eigen::MatrixXd projector_;  // (X'X)^-1 X', p x n
    Eigen::VectorXd leverages_;
    std::vector<std::string> columns_;
};

OlsFit ols(const Eigen::VectorXd& response, const Eigen::MatrixXd& design, std::vector<std::string> columns = {});

/// Slope vector of the within-arm regression of q on (1, x).
Eigen::VectorXd groupwise_projection_slope(const Eigen::VectorXd& q, const Eigen::MatrixXd& x, const Assignment& z,
                                           int arm);

/// The interacted design [1, z, x, z*x] and its column tags.
struct Design {
    Eigen::MatrixXd matrix;
    std::vector<std::string> columns;
};
Design interacted_design(const ExperimentData& data);

}  // namespace cace
