#include "cace/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace cace {

namespace {

nlohmann::json number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

std::string fixed3(double v) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

std::string fixed1(double v) {
    if (!std::isfinite(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string pad(std::string s, std::size_t width, bool left = false) {
    if (s.size() >= width) return s;
    return left ? s + std::string(width - s.size(), ' ') : std::string(width - s.size(), ' ') + s;
}

std::string describe_set(const ConfidenceSet& set) {
    switch (set.shape) {
    case SetShape::interval: return "[" + fixed3(set.lower) + ", " + fixed3(set.upper) + "]";
    case SetShape::complement: return "(-Inf, " + fixed3(set.lower) + "] U [" + fixed3(set.upper) + ", Inf)";
    case SetShape::whole_line: return "(-Inf, Inf)";
    case SetShape::empty: return "{}";
    }
    return "?";
}

}  // namespace

nlohmann::json to_json(const IntervalReport& report, const ExperimentData& data) {
    nlohmann::json set{{"shape", std::string(to_string(report.set.shape))}};
    if (report.set.has_endpoints()) {
        set["lower"] = number(report.set.lower);
        set["upper"] = number(report.set.upper);
    }
    return {
        {"method", std::string(to_string(report.method))},
        {"n", data.n()},
        {"n1", data.n1()},
        {"n0", data.n0()},
        {"p_co_hat", number(report.point.tau_w_hat)},
        {"tau_hat", number(report.point.tau_hat)},
        {"alpha", report.set.alpha},
        {"set", set},
        {"variance_numerator", number(report.variance_numerator)},
        {"abnormal", report.abnormal},
    };
}

nlohmann::json estimate_json(const ExperimentData& data, const std::vector<IntervalReport>& reports) {
    nlohmann::json means = nlohmann::json::object();
    for (std::size_t j = 0; j < data.k(); ++j)
        means[data.covariate_names()[j]] = number(data.covariate_means()[static_cast<Eigen::Index>(j)]);
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : reports) list.push_back(to_json(r, data));
    return {{"n", data.n()}, {"n1", data.n1()}, {"n0", data.n0()}, {"covariate_means", means}, {"reports", list}};
}

std::string estimate_table(const std::vector<IntervalReport>& reports) {
    std::ostringstream out;
    out << pad("method", 12, true) << pad("p_co", 9) << pad("estimate", 11) << "   interval\n";
    for (const auto& r : reports) {
        out << pad(std::string(display_name(r.method)), 12, true) << pad(fixed3(r.point.tau_w_hat), 9)
            << pad(fixed3(r.point.tau_hat), 11) << "   " << describe_set(r.set);
        if (r.abnormal) out << "  (abnormal)";
        out << '\n';
    }
    return out.str();
}

nlohmann::json to_json(const SimulationSummary& s) {
    const auto& c = s.config;
    nlohmann::json methods = nlohmann::json::object();
    for (const auto& m : s.methods) {
        methods[std::string(to_string(m.method))] = {
            {"mae", number(m.mae)},
            {"coverage_rate", number(m.coverage_rate)},
            {"coverage_deviation", number(100.0 * (m.coverage_rate - (1.0 - c.alpha)))},
            {"median_length", number(m.median_length)},
            {"abnormal_proportion", m.abnormal_proportion},
            {"valid", m.valid},
        };
    }
    return {
        {"config",
         {{"n", c.n}, {"p_co", c.p_co}, {"rho", c.rho}, {"k", c.k}, {"reps", c.reps}, {"seed", c.seed},
          {"alpha", c.alpha}}},
        {"true_tau_cace", number(s.true_tau_cace)},
        {"true_p_co", number(s.true_p_co)},
        {"population_attempts", s.population_attempts},
        {"methods", methods},
        {"diagnostics",
         {{"true_var_tau_b", number(s.diagnostics.true_var_tau_b)},
          {"var_plus", number(s.diagnostics.var_plus)},
          {"var_plus_given_x", number(s.diagnostics.var_plus_given_x)},
          {"pril_limit", number(s.diagnostics.pril_limit)},
          {"empirical_pril", number(s.diagnostics.empirical_pril)}}},
    };
}

std::string summary_tables(const SimulationSummary& s) {
    std::ostringstream out;
    const auto& c = s.config;
    char head[256];
    std::snprintf(head, sizeof head, "n = %zu, p_co = %.3f, rho = %.3f, K = %zu, reps = %zu, seed = %llu\n", c.n,
                  c.p_co, c.rho, c.k, c.reps, static_cast<unsigned long long>(c.seed));
    out << head << "true CACE = " << fixed3(s.true_tau_cace) << ", true p_co = " << fixed3(s.true_p_co) << "\n\n";

    auto block = [&](const std::string& title, auto&& cell) {
        out << title << '\n';
        for (const auto& m : s.methods) out << "  " << pad(std::string(display_name(m.method)), 12, true) << pad(cell(m), 10) << '\n';
        out << '\n';
    };
    block("Proportion of abnormal intervals", [](const MethodSummary& m) { return fixed3(m.abnormal_proportion); });
    out << "Median absolute error\n"
        << "  " << pad("Wald", 12, true) << pad(fixed3(s.method(IntervalMethod::wald_delta).mae), 10) << '\n'
        << "  " << pad("Reg", 12, true) << pad(fixed3(s.method(IntervalMethod::reg_ehw).mae), 10) << "\n\n";
    block("Coverage, 100 x (CRate - nominal)",
          [&](const MethodSummary& m) { return fixed1(100.0 * (m.coverage_rate - (1.0 - c.alpha))); });
    block("Median interval length", [](const MethodSummary& m) { return fixed3(m.median_length); });

    const auto& d = s.diagnostics;
    out << "Efficiency diagnostics\n"
        << "  exact Var(tau_B)        " << d.true_var_tau_b << '\n'
        << "  Var(tau_B)+             " << d.var_plus << '\n'
        << "  Var(tau_B|x)+           " << d.var_plus_given_x << '\n'
        << "  PRIL limit              " << fixed3(d.pril_limit) << '\n'
        << "  empirical PRIL          " << fixed3(d.empirical_pril) << '\n';
    return out.str();
}

void write_replicates_csv(const SimulationSummary& s, std::ostream& out) {
    out << "replicate,method,estimate,lower,upper,length,shape,covered,abnormal\n";
    auto num = [](double v) {
        if (std::isnan(v)) return std::string("NA");
        if (std::isinf(v)) return std::string(v > 0 ? "Inf" : "-Inf");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t r = 0; r < s.replicates.size(); ++r) {
        for (std::size_t m = 0; m < all_interval_methods.size(); ++m) {
            const auto& o = s.replicates[r].outcomes[m];
            out << r << ',' << to_string(all_interval_methods[m]) << ',' << num(o.estimate) << ',' << num(o.lower)
                << ',' << num(o.upper) << ',' << num(o.length) << ',' << to_string(o.shape) << ','
                << (o.covered ? 1 : 0) << ',' << (o.abnormal ? 1 : 0) << '\n';
        }
    }
}

std::string dump_canonical(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace cace
