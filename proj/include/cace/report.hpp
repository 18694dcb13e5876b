#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cace/data.hpp"
#include "cace/intervals.hpp"
#include "cace/simulation.hpp"

namespace cace {

/// {method, n, n1, n0, p_co_hat, tau_hat, alpha, set: {shape, lower?, upper?},
///  variance_numerator, abnormal}. Non-finite numbers become null.
nlohmann::json to_json(const IntervalReport& report, const ExperimentData& data);

/// Per-method reports plus sample sizes and the covariate means removed at load.
nlohmann::json estimate_json(const ExperimentData& data, const std::vector<IntervalReport>& reports);

/// Method | p_co estimate | CACE estimate | interval, three decimals.
std::string estimate_table(const std::vector<IntervalReport>& reports);

nlohmann::json to_json(const SimulationSummary& summary);

/// Abnormal proportions, MAE, coverage deviation 100*(CRate - (1 - alpha)) and
/// median length blocks, followed by the efficiency diagnostics.
std::string summary_tables(const SimulationSummary& summary);

/// replicate,method,estimate,lower,upper,length,shape,covered,abnormal
void write_replicates_csv(const SimulationSummary& summary, std::ostream& out);

/// Canonical serialization: sorted keys, two-space indent, trailing newline.
std::string dump_canonical(const nlohmann::json& j);

}  // namespace cace
