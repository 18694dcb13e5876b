#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cace/data.hpp"
#include "cace/intervals.hpp"
#include "cace/simulation.hpp"

namespace cace::cli {

enum class Format { json, text };

/// Process exit codes.
inline constexpr int exit_ok = 0;
inline constexpr int exit_invalid = 2;
inline constexpr int exit_rank_deficient = 3;

struct EstimateRequest {
    std::string input;
    std::vector<IntervalMethod> methods;  // empty: every applicable method
    double alpha = 0.05;
    CovariateSelection covariates = CovariateSelection::all();
    Format format = Format::text;
};

struct SimulateRequest {
    SimConfig config;
    Format format = Format::text;
    std::optional<std::string> dump_replicates;
};

/// Parses "auto", "none" or a comma-separated column list.
CovariateSelection parse_covariates(const std::string& text);
/// Parses a comma-separated method list; throws DataError on unknown names.
std::vector<IntervalMethod> parse_methods(const std::string& text);

/// Runs the request and writes the serialized report to `out`; diagnostics go
/// to `err`. Returns the process exit code. Abnormal results exit 0.
int run_estimate(const EstimateRequest& request, std::ostream& out, std::ostream& err);
int run_simulate(const SimulateRequest& request, std::ostream& out, std::ostream& err);

/// Estimation on an already-loaded dataset; throws on failure.
std::vector<IntervalReport> estimate_all(const ExperimentData& data, const std::vector<IntervalMethod>& methods,
                                         double alpha);

}  // namespace cace::cli
