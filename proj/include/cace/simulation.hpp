#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "cace/data.hpp"
#include "cace/intervals.hpp"
#include "cace/population.hpp"

namespace cace {

struct SimConfig {
    std::size_t n = 400;
    double p_co = 0.5;
    double rho = 0.0;
    std::size_t k = 5;
    std::size_t reps = 1000;
    std::uint64_t seed = 1;
    double alpha = 0.05;
    /// Worker threads for replicates; 0 reads CACE_THREADS, then falls back
    /// to the hardware concurrency. Results do not depend on it.
    unsigned threads = 0;

    /// Throws ConfigError on odd n, n*p_co < 1, |rho| >= 1/sqrt(2), reps == 0,
    /// K == 0, n/2 < K + 2, or alpha outside (0, 1).
    void validate() const;
};

/// Independent pseudo-random stream keyed by (seed, stream index).
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t stream);

    double normal() { return normal_(engine_); }
    std::uint64_t below(std::uint64_t bound);  // uniform on [0, bound)

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// Draws a population from the latent-index design with exactly
/// round(n * p_co) compliers and no defiers. Retries the draw up to 100
/// times when the complier count cannot be met; then throws ConfigError.
PotentialPopulation generate_population(const SimConfig& cfg, RandomStream& rng, int* attempts = nullptr);

/// Uniformly random assignment with exactly n1 treated units.
Assignment complete_randomization(std::size_t n, std::size_t n1, RandomStream& rng);

/// Reveals W = W(Z) and Y = Y(W) for a given assignment.
ExperimentData observe(const PotentialPopulation& pop, const Assignment& z);

/// Exact randomization variance of the adjusted-outcome contrast
/// S2_B(1)/n1 + S2_B(0)/n0 - S2_{B(1)-B(0)}/n, with B(z) = Y(z) - tau W(z).
double true_var_tau_b(const PotentialPopulation& pop, std::size_t n1);

struct VariancePlus {
    double total = 0.0;        // S2_B(1)/n1 + S2_B(0)/n0
    double explained = 0.0;    // same with the variances of the projections of B(z) on x
};
VariancePlus variance_plus(const PotentialPopulation& pop, std::size_t n1);

/// Limit of the percent reduction in interval length from covariate adjustment.
double pril_limit(const PotentialPopulation& pop, std::size_t n1);

struct MethodOutcome {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double length = 0.0;
    SetShape shape = SetShape::interval;
    bool covered = false;
    bool abnormal = false;
};

struct ReplicateRecord {
    std::array<MethodOutcome, 5> outcomes;  // indexed like all_interval_methods
};

struct MethodSummary {
    IntervalMethod method = IntervalMethod::wald_ld;
    double mae = 0.0;
    double coverage_rate = 0.0;
    double median_length = 0.0;
    double abnormal_proportion = 0.0;
    std::size_t valid = 0;
};

struct SimulationDiagnostics {
    double true_var_tau_b = 0.0;
    double var_plus = 0.0;
    double var_plus_given_x = 0.0;
    double pril_limit = 0.0;
    double empirical_pril = 0.0;  // 1 - median Reg-EHW length / median Wald-Delta length
};

struct SimulationSummary {
    SimConfig config;
    double true_tau_cace = 0.0;
    double true_p_co = 0.0;
    int population_attempts = 1;
    std::array<MethodSummary, 5> methods;
    SimulationDiagnostics diagnostics;
    std::vector<ReplicateRecord> replicates;

    const MethodSummary& method(IntervalMethod m) const;
};

/// Scores all five procedures on one randomized dataset.
ReplicateRecord evaluate_replicate(const ExperimentData& data, double true_tau, double alpha);

/// Fixed population, cfg.reps complete randomizations, per-method metrics.
SimulationSummary run_study(const SimConfig& cfg);
SimulationSummary run_study(const SimConfig& cfg, const PotentialPopulation& pop);

/// Lower median (element floor((m-1)/2) of the sorted values); NaN when empty.
double lower_median(std::vector<double> values);

unsigned resolve_threads(unsigned requested);

}  // namespace cace
