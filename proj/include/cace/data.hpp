#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cace {

using Assignment = std::vector<std::uint8_t>;

/// Observed data (Z, W, Y, x) of a completely randomized experiment.
///
/// Instances are immutable and always valid: n >= 4, both arms hold at
/// least two units, z and w are 0/1, every value is finite, and the
/// covariate columns have full-sample mean zero.
class ExperimentData {
public:
    /// Validates the inputs and centers the covariates. `x` is n x K
    /// (K may be 0). Throws DataError.
    static ExperimentData create(Assignment z, Eigen::VectorXd w, Eigen::VectorXd y,
                                 Eigen::MatrixXd x = {}, std::vector<std::string> covariate_names = {});

    std::size_t n() const noexcept { return z_.size(); }
    std::size_t n1() const noexcept { return n1_; }
    std::size_t n0() const noexcept { return n() - n1_; }
    std::size_t k() const noexcept { return static_cast<std::size_t>(x_.cols()); }

    const Assignment& z() const noexcept { return z_; }
    const Eigen::VectorXd& w() const noexcept { return w_; }
    const Eigen::VectorXd& y() const noexcept { return y_; }
    /// Centered covariates, n x K.
    const Eigen::MatrixXd& x() const noexcept { return x_; }
    const std::vector<std::string>& covariate_names() const noexcept { return names_; }
    /// Column means removed during centering.
    const Eigen::VectorXd& covariate_means() const noexcept { return means_; }

    /// Copy of this dataset with the outcome replaced.
    ExperimentData with_outcome(Eigen::VectorXd y) const;

private:
    ExperimentData() = default;

    Assignment z_;
    Eigen::VectorXd w_;
    Eigen::VectorXd y_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd means_;
    std::vector<std::string> names_;
    std::size_t n1_ = 0;
};

struct CovariateSelection {
    enum class Mode { all, none, named };
    Mode mode = Mode::all;
    std::vector<std::string> names;

    static CovariateSelection all() { return {}; }
    static CovariateSelection none() { return {Mode::none, {}}; }
    static CovariateSelection named(std::vector<std::string> cols) { return {Mode::named, std::move(cols)}; }
};

/// Reads a header-first CSV with columns z, w, y and optional numeric
/// covariate columns. Rows with missing cells are rejected. Throws DataError.
ExperimentData load_csv(const std::filesystem::path& path,
                        const CovariateSelection& selection = CovariateSelection::all());

/// Same as load_csv, from in-memory text.
ExperimentData parse_csv(const std::string& text,
                         const CovariateSelection& selection = CovariateSelection::all());

/// Mean over {z=1} minus mean over {z=0}.
double difference_in_means(std::span<const double> q, const Assignment& z);
double difference_in_means(const Eigen::VectorXd& q, const Assignment& z);

/// Unbiased (n - 1 divisor) sample variance and covariance.
double sample_variance(std::span<const double> q);
double sample_covariance(std::span<const double> q, std::span<const double> r);

/// Within-arm sample variance of q over units with z == arm.
double arm_variance(const Eigen::VectorXd& q, const Assignment& z, int arm);
double arm_covariance(const Eigen::VectorXd& q, const Eigen::VectorXd& r, const Assignment& z, int arm);

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace cace
