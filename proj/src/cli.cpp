#include "cace/cli.hpp"

#include <fstream>
#include <sstream>

#include "cace/error.hpp"
#include "cace/report.hpp"

namespace cace::cli {

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto first = item.find_first_not_of(' ');
        auto last = item.find_last_not_of(' ');
        if (first != std::string::npos) items.push_back(item.substr(first, last - first + 1));
    }
    return items;
}

}  // namespace

CovariateSelection parse_covariates(const std::string& text) {
    if (text == "auto" || text == "all") return CovariateSelection::all();
    if (text == "none") return CovariateSelection::none();
    auto names = split_list(text);
    if (names.empty()) throw DataError("empty covariate list");
    return CovariateSelection::named(std::move(names));
}

std::vector<IntervalMethod> parse_methods(const std::string& text) {
    if (text == "all") return {all_interval_methods.begin(), all_interval_methods.end()};
    std::vector<IntervalMethod> methods;
    for (const auto& name : split_list(text)) {
        auto m = parse_interval_method(name);
        if (!m) throw DataError("unknown method '" + name + "'");
        methods.push_back(*m);
    }
    if (methods.empty()) throw DataError("no methods requested");
    return methods;
}

std::vector<IntervalReport> estimate_all(const ExperimentData& data, const std::vector<IntervalMethod>& requested,
                                         double alpha) {
    std::vector<IntervalMethod> methods = requested;
    if (methods.empty()) {
        for (auto m : all_interval_methods)
            if (data.k() > 0 || !uses_covariates(m)) methods.push_back(m);
    }
    for (auto m : methods)
        if (uses_covariates(m) && data.k() == 0) throw DataError("reg requires covariates");
    std::vector<IntervalReport> reports;
    for (auto m : methods) reports.push_back(compute_interval(data, m, alpha));
    return reports;
}

int run_estimate(const EstimateRequest& request, std::ostream& out, std::ostream& err) {
    try {
        if (!(request.alpha > 0.0 && request.alpha < 1.0)) throw DataError("alpha must lie in (0, 1)");
        const auto data = load_csv(request.input, request.covariates);
        const auto reports = estimate_all(data, request.methods, request.alpha);
        if (request.format == Format::json) {
            out << dump_canonical(estimate_json(data, reports));
        } else {
            out << "n = " << data.n() << " (n1 = " << data.n1() << ", n0 = " << data.n0() << "), K = " << data.k()
                << ", alpha = " << request.alpha << "\n\n"
                << estimate_table(reports);
        }
        return exit_ok;
    } catch (const RankDeficiencyError& e) {
        err << "error: " << e.what() << '\n';
        return exit_rank_deficient;
    } catch (const DegenerateLeverageError& e) {
        err << "error: " << e.what() << '\n';
        return exit_rank_deficient;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid;
    }
}

int run_simulate(const SimulateRequest& request, std::ostream& out, std::ostream& err) {
    try {
        const auto summary = run_study(request.config);
        if (request.dump_replicates) {
            std::ofstream dump(*request.dump_replicates);
            if (!dump) throw DataError("cannot write '" + *request.dump_replicates + "'");
            write_replicates_csv(summary, dump);
        }
        if (request.format == Format::json)
            out << dump_canonical(to_json(summary));
        else
            out << summary_tables(summary);
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid;
    } catch (const DataError& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid;
    }
}

}  // namespace cace::cli
