#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "cace/data.hpp"
#include "cace/estimators.hpp"
#include "cace/linalg.hpp"

namespace cace {

enum class SetShape { empty, interval, whole_line, complement };

std::string_view to_string(SetShape s) noexcept;

/// A confidence set of one of four forms. For `complement`, the covered
/// region is (-inf, lower] U [upper, inf); one endpoint may be infinite,
/// which encodes a half-line.
struct ConfidenceSet {
    SetShape shape = SetShape::whole_line;
    double lower = 0.0;
    double upper = 0.0;
    double alpha = 0.05;

    static ConfidenceSet empty(double alpha) { return {SetShape::empty, 0.0, 0.0, alpha}; }
    static ConfidenceSet whole_line(double alpha) { return {SetShape::whole_line, 0.0, 0.0, alpha}; }
    static ConfidenceSet interval(double lo, double hi, double alpha) { return {SetShape::interval, lo, hi, alpha}; }
    static ConfidenceSet complement(double lo, double hi, double alpha) { return {SetShape::complement, lo, hi, alpha}; }

    bool has_endpoints() const noexcept { return shape == SetShape::interval || shape == SetShape::complement; }
    bool covers(double beta) const noexcept;
    /// upper - lower for intervals, +inf for anything unbounded, 0 for empty.
    double length() const noexcept;
};

enum class IntervalMethod { wald_ld, wald_delta, reg_ehw, reg_hc2, reg_hc3 };

inline constexpr std::array<IntervalMethod, 5> all_interval_methods{
    IntervalMethod::wald_ld, IntervalMethod::wald_delta, IntervalMethod::reg_ehw, IntervalMethod::reg_hc2,
    IntervalMethod::reg_hc3};

/// "wald-ld", "wald-delta", "reg-ehw", "reg-hc2", "reg-hc3".
std::string_view to_string(IntervalMethod m) noexcept;
/// Display label used in tables, e.g. "Wald-Delta".
std::string_view display_name(IntervalMethod m) noexcept;
std::optional<IntervalMethod> parse_interval_method(std::string_view name) noexcept;
bool uses_covariates(IntervalMethod m) noexcept;

struct IntervalReport {
    IntervalMethod method = IntervalMethod::wald_delta;
    PointEstimate point;
    ConfidenceSet set;
    double variance_numerator = 0.0;  // variance of the adjusted-outcome contrast, before dividing by tau_w_hat^2
    bool abnormal = false;
};

/// Inverse standard normal CDF (rational approximation plus one Halley step).
double normal_quantile(double p);

/// Solution set of a*beta^2 + b*beta + d <= 0, classified into the four shapes.
ConfidenceSet solve_quadratic_leq(double a, double b, double d, double alpha = 0.05);

struct QuadraticCoefficients {
    double a = 0.0;
    double b = 0.0;
    double d = 0.0;
};

/// Coefficients of the constant-effect test-inversion inequality
/// (tau_y - beta tau_w)^2 <= nu^2 (1/n1 + 1/n0) (S_Y^2 + beta^2 S_W^2 - 2 beta S_YW).
QuadraticCoefficients wald_ld_coefficients(const ExperimentData& data, double alpha = 0.05);

IntervalReport wald_ld_set(const ExperimentData& data, double alpha = 0.05);
IntervalReport wald_delta_interval(const ExperimentData& data, double alpha = 0.05);
IntervalReport reg_interval(const ExperimentData& data, double alpha = 0.05, HcFlavor flavor = HcFlavor::ehw);

/// EHW, HC2 and HC3 intervals sharing one factorization of the interacted design.
std::array<IntervalReport, 3> reg_intervals(const ExperimentData& data, double alpha, const LeastSquares& interacted);

/// Dispatch on the method tag.
IntervalReport compute_interval(const ExperimentData& data, IntervalMethod method, double alpha = 0.05);

}  // namespace cace
