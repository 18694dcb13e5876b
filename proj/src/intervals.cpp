#include "cace/intervals.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cace/error.hpp"

namespace cace {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double nan = std::numeric_limits<double>::quiet_NaN();

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0, 1)");
}

// Acklam's rational approximation on the lower half, p <= 0.5.
double lower_tail_quantile(double p) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    // Halley refinement against the exact CDF.
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

IntervalReport abnormal_report(IntervalMethod method, const PointEstimate& point, double alpha) {
    IntervalReport r;
    r.method = method;
    r.point = point;
    r.set = ConfidenceSet::whole_line(alpha);
    r.variance_numerator = nan;
    r.abnormal = true;
    return r;
}

IntervalReport symmetric_report(IntervalMethod method, const PointEstimate& point, double variance, double alpha) {
    const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(variance) / std::abs(point.tau_w_hat);
    IntervalReport r;
    r.method = method;
    r.point = point;
    r.set = ConfidenceSet::interval(point.tau_hat - half, point.tau_hat + half, alpha);
    r.variance_numerator = variance;
    r.abnormal = false;
    return r;
}

IntervalMethod reg_method(HcFlavor f) {
    switch (f) {
    case HcFlavor::ehw: return IntervalMethod::reg_ehw;
    case HcFlavor::hc2: return IntervalMethod::reg_hc2;
    case HcFlavor::hc3: return IntervalMethod::reg_hc3;
    }
    return IntervalMethod::reg_ehw;
}

LeastSquares interacted_fit(const ExperimentData& data) {
    if (data.k() == 0) throw DataError("reg requires covariates");
    groupwise_projection_slope(data.y(), data.x(), data.z(), 1);
    groupwise_projection_slope(data.y(), data.x(), data.z(), 0);
    auto design = interacted_design(data);
    return LeastSquares(design.matrix, std::move(design.columns));
}

}  // namespace

std::string_view to_string(SetShape s) noexcept {
    switch (s) {
    case SetShape::empty: return "empty";
    case SetShape::interval: return "interval";
    case SetShape::whole_line: return "whole_line";
    case SetShape::complement: return "complement";
    }
    return "?";
}

bool ConfidenceSet::covers(double beta) const noexcept {
    switch (shape) {
    case SetShape::empty: return false;
    case SetShape::interval: return lower <= beta && beta <= upper;
    case SetShape::whole_line: return true;
    case SetShape::complement: return beta <= lower || beta >= upper;
    }
    return false;
}

double ConfidenceSet::length() const noexcept {
    switch (shape) {
    case SetShape::empty: return 0.0;
    case SetShape::interval: return upper - lower;
    default: return inf;
    }
}

std::string_view to_string(IntervalMethod m) noexcept {
    switch (m) {
    case IntervalMethod::wald_ld: return "wald-ld";
    case IntervalMethod::wald_delta: return "wald-delta";
    case IntervalMethod::reg_ehw: return "reg-ehw";
    case IntervalMethod::reg_hc2: return "reg-hc2";
    case IntervalMethod::reg_hc3: return "reg-hc3";
    }
    return "?";
}

std::string_view display_name(IntervalMethod m) noexcept {
    switch (m) {
    case IntervalMethod::wald_ld: return "Wald-LD";
    case IntervalMethod::wald_delta: return "Wald-Delta";
    case IntervalMethod::reg_ehw: return "Reg-EHW";
    case IntervalMethod::reg_hc2: return "Reg-HC2";
    case IntervalMethod::reg_hc3: return "Reg-HC3";
    }
    return "?";
}

std::optional<IntervalMethod> parse_interval_method(std::string_view name) noexcept {
    for (auto m : all_interval_methods)
        if (to_string(m) == name) return m;
    return std::nullopt;
}

bool uses_covariates(IntervalMethod m) noexcept {
    return m != IntervalMethod::wald_ld && m != IntervalMethod::wald_delta;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
    if (p == 0.5) return 0.0;
    return p < 0.5 ? lower_tail_quantile(p) : -lower_tail_quantile(1.0 - p);
}

ConfidenceSet solve_quadratic_leq(double a, double b, double d, double alpha) {
    if (a == 0.0) {
        if (b == 0.0) return d <= 0.0 ? ConfidenceSet::whole_line(alpha) : ConfidenceSet::empty(alpha);
        const double root = -d / b;
        return b > 0.0 ? ConfidenceSet::complement(root, inf, alpha) : ConfidenceSet::complement(-inf, root, alpha);
    }

    const long double la = a, lb = b, ld = d;
    const long double disc = lb * lb - 4.0L * la * ld;
    const long double scale = std::max(lb * lb, 4.0L * std::fabs(la * ld));
    if (std::fabs(disc) <= 1e-14L * scale) {
        const auto root = static_cast<double>(-lb / (2.0L * la));
        return a > 0.0 ? ConfidenceSet::interval(root, root, alpha) : ConfidenceSet::complement(root, root, alpha);
    }
    if (disc < 0.0L) return a > 0.0 ? ConfidenceSet::empty(alpha) : ConfidenceSet::whole_line(alpha);

    const long double q = -0.5L * (lb + (lb >= 0.0L ? 1.0L : -1.0L) * std::sqrt(disc));
    auto r1 = static_cast<double>(q / la);
    auto r2 = static_cast<double>(ld / q);
    if (r1 > r2) std::swap(r1, r2);
    return a > 0.0 ? ConfidenceSet::interval(r1, r2, alpha) : ConfidenceSet::complement(r1, r2, alpha);
}

QuadraticCoefficients wald_ld_coefficients(const ExperimentData& data, double alpha) {
    check_alpha(alpha);
    const double tau_y = difference_in_means(data.y(), data.z());
    const double tau_w = difference_in_means(data.w(), data.z());
    const double s_yy = sample_variance(as_span(data.y()));
    const double s_ww = sample_variance(as_span(data.w()));
    const double s_yw = sample_covariance(as_span(data.y()), as_span(data.w()));
    const double nu = normal_quantile(1.0 - alpha / 2.0);
    const double c = nu * nu * (1.0 / static_cast<double>(data.n1()) + 1.0 / static_cast<double>(data.n0()));
    return {tau_w * tau_w - c * s_ww, -2.0 * tau_y * tau_w + 2.0 * c * s_yw, tau_y * tau_y - c * s_yy};
}

IntervalReport wald_ld_set(const ExperimentData& data, double alpha) {
    const auto coef = wald_ld_coefficients(data, alpha);
    IntervalReport r;
    r.method = IntervalMethod::wald_ld;
    r.point = wald_estimate(data);
    r.set = solve_quadratic_leq(coef.a, coef.b, coef.d, alpha);
    r.abnormal = r.point.abnormal || r.set.shape != SetShape::interval;
    if (r.point.abnormal) {
        r.variance_numerator = nan;
    } else {
        const double t = r.point.tau_hat;
        const double s_yy = sample_variance(as_span(data.y()));
        const double s_ww = sample_variance(as_span(data.w()));
        const double s_yw = sample_covariance(as_span(data.y()), as_span(data.w()));
        r.variance_numerator = (1.0 / static_cast<double>(data.n1()) + 1.0 / static_cast<double>(data.n0())) *
                               (s_yy + t * t * s_ww - 2.0 * t * s_yw);
    }
    return r;
}

IntervalReport wald_delta_interval(const ExperimentData& data, double alpha) {
    check_alpha(alpha);
    const auto point = wald_estimate(data);
    if (point.abnormal) return abnormal_report(IntervalMethod::wald_delta, point, alpha);
    const Eigen::VectorXd b_hat = data.y() - point.tau_hat * data.w();
    const double variance = arm_variance(b_hat, data.z(), 1) / static_cast<double>(data.n1()) +
                            arm_variance(b_hat, data.z(), 0) / static_cast<double>(data.n0());
    return symmetric_report(IntervalMethod::wald_delta, point, variance, alpha);
}

std::array<IntervalReport, 3> reg_intervals(const ExperimentData& data, double alpha, const LeastSquares& interacted) {
    check_alpha(alpha);
    constexpr std::array<HcFlavor, 3> flavors{HcFlavor::ehw, HcFlavor::hc2, HcFlavor::hc3};
    const auto point = reg_estimate(data, interacted);
    std::array<IntervalReport, 3> out;
    if (point.abnormal) {
        for (std::size_t i = 0; i < 3; ++i) out[i] = abnormal_report(reg_method(flavors[i]), point, alpha);
        return out;
    }
    const Eigen::VectorXd b_hat = data.y() - point.tau_hat * data.w();
    const auto fit = interacted.fit(b_hat);
    for (std::size_t i = 0; i < 3; ++i) {
        const double variance = interacted.sandwich_variance(1, fit.residuals, flavors[i]);
        out[i] = symmetric_report(reg_method(flavors[i]), point, variance, alpha);
    }
    return out;
}

IntervalReport reg_interval(const ExperimentData& data, double alpha, HcFlavor flavor) {
    check_alpha(alpha);
    const auto ls = interacted_fit(data);
    const auto point = reg_estimate(data, ls);
    if (point.abnormal) return abnormal_report(reg_method(flavor), point, alpha);
    const Eigen::VectorXd b_hat = data.y() - point.tau_hat * data.w();
    const auto fit = ls.fit(b_hat);
    return symmetric_report(reg_method(flavor), point, ls.sandwich_variance(1, fit.residuals, flavor), alpha);
}

IntervalReport compute_interval(const ExperimentData& data, IntervalMethod method, double alpha) {
    switch (method) {
    case IntervalMethod::wald_ld: return wald_ld_set(data, alpha);
    case IntervalMethod::wald_delta: return wald_delta_interval(data, alpha);
    case IntervalMethod::reg_ehw: return reg_interval(data, alpha, HcFlavor::ehw);
    case IntervalMethod::reg_hc2: return reg_interval(data, alpha, HcFlavor::hc2);
    case IntervalMethod::reg_hc3: return reg_interval(data, alpha, HcFlavor::hc3);
    }
    throw std::invalid_argument("unknown interval method");
}

}  // namespace cace
