#include "cace/linalg.hpp"

#include <cmath>

#include "cace/error.hpp"

namespace cace {

LeastSquares::LeastSquares(const Eigen::MatrixXd& design, std::vector<std::string> columns)
    : design_(design), columns_(std::move(columns)) {
    const auto n = design.rows();
    const auto p = design.cols();
    if (columns_.empty()) {
        for (Eigen::Index j = 0; j < p; ++j) columns_.push_back("c" + std::to_string(j));
    }
    if (static_cast<Eigen::Index>(columns_.size()) != p) throw DataError("design column tag count mismatch");
    if (p == 0) throw DataError("design has no columns");
    if (n < p)
        throw RankDeficiencyError("design has fewer rows (" + std::to_string(n) + ") than columns (" +
                                      std::to_string(p) + ")",
                                  columns_.back());

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    const Eigen::MatrixXd& packed = qr.matrixQR();
    const auto& perm = qr.colsPermutation().indices();
    const double largest = std::abs(packed(0, 0));
    for (Eigen::Index i = 0; i < p; ++i) {
        if (largest == 0.0 || std::abs(packed(i, i)) < rank_tolerance * largest) {
            const auto& tag = columns_[static_cast<std::size_t>(perm(i))];
            throw RankDeficiencyError("rank-deficient design: column '" + tag + "' is collinear with the others", tag);
        }
    }

    Eigen::MatrixXd q_thin = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    leverages_ = q_thin.rowwise().squaredNorm();
    Eigen::MatrixXd r_inv_qt =
        packed.topLeftCorner(p, p).triangularView<Eigen::Upper>().solve(q_thin.transpose());
    projector_ = qr.colsPermutation() * r_inv_qt;
}

OlsFit LeastSquares::fit(const Eigen::VectorXd& response) const {
    if (response.size() != rows()) throw DataError("response length does not match design rows");
    OlsFit f;
    f.coefficients = coefficients(response);
    f.residuals = response - design_ * f.coefficients;
    f.leverages = leverages_;
    f.design_columns = columns_;
    return f;
}

double LeastSquares::sandwich_variance(Eigen::Index coef, const Eigen::VectorXd& residuals, HcFlavor flavor) const {
    const auto row = projector_.row(coef);
    double v = 0.0;
    for (Eigen::Index i = 0; i < residuals.size(); ++i) {
        double weight = 1.0;
        if (flavor != HcFlavor::ehw) {
            const double h = leverages_[i];
            if (h > 1.0 - 1e-12)
                throw DegenerateLeverageError("unit " + std::to_string(i) + " has leverage 1; HC2/HC3 undefined",
                                              static_cast<std::size_t>(i));
            weight = flavor == HcFlavor::hc2 ? 1.0 / (1.0 - h) : 1.0 / ((1.0 - h) * (1.0 - h));
        }
        v += row[i] * row[i] * weight * residuals[i] * residuals[i];
    }
    return v;
}

OlsFit ols(const Eigen::VectorXd& response, const Eigen::MatrixXd& design, std::vector<std::string> columns) {
    return LeastSquares(design, std::move(columns)).fit(response);
}

Eigen::VectorXd groupwise_projection_slope(const Eigen::VectorXd& q, const Eigen::MatrixXd& x, const Assignment& z,
                                           int arm) {
    const auto k = x.cols();
    if (k == 0) return Eigen::VectorXd(0);
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < z.size(); ++i)
        if (z[i] == arm) rows.push_back(static_cast<Eigen::Index>(i));
    const auto m = static_cast<Eigen::Index>(rows.size());
    if (m < k + 2)
        throw RankDeficiencyError("arm " + std::to_string(arm) + " has " + std::to_string(m) +
                                      " units; at least K+2 = " + std::to_string(k + 2) + " are needed",
                                  "arm" + std::to_string(arm));
    Eigen::MatrixXd design(m, k + 1);
    Eigen::VectorXd response(m);
    std::vector<std::string> tags{"intercept"};
    for (Eigen::Index j = 0; j < k; ++j) tags.push_back("x" + std::to_string(j + 1));
    for (Eigen::Index r = 0; r < m; ++r) {
        design(r, 0) = 1.0;
        design.row(r).tail(k) = x.row(rows[static_cast<std::size_t>(r)]);
        response[r] = q[rows[static_cast<std::size_t>(r)]];
    }
    return LeastSquares(design, std::move(tags)).coefficients(response).tail(k);
}

Design interacted_design(const ExperimentData& data) {
    const auto n = static_cast<Eigen::Index>(data.n());
    const auto k = static_cast<Eigen::Index>(data.k());
    Design d;
    d.matrix.resize(n, 2 * k + 2);
    d.columns = {"intercept", "z"};
    for (const auto& name : data.covariate_names()) d.columns.push_back(name);
    for (const auto& name : data.covariate_names()) d.columns.push_back("z:" + name);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double zi = data.z()[static_cast<std::size_t>(i)];
        d.matrix(i, 0) = 1.0;
        d.matrix(i, 1) = zi;
        d.matrix.row(i).segment(2, k) = data.x().row(i);
        d.matrix.row(i).segment(2 + k, k) = zi * data.x().row(i);
    }
    return d;
}

}  // namespace cace
