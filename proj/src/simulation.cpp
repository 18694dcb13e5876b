#include "cace/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "cace/error.hpp"
#include "cace/estimators.hpp"
#include "cace/linalg.hpp"

namespace cace {

namespace {

constexpr int max_population_attempts = 100;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Finite-population variance of B(z) and of its projection on (1, x).
struct ArmMoments {
    double variance = 0.0;
    double explained = 0.0;
};

ArmMoments arm_moments(const Eigen::VectorXd& b, const Eigen::MatrixXd& x) {
    ArmMoments m;
    m.variance = sample_variance(as_span(b));
    const auto n = x.rows();
    Eigen::MatrixXd design(n, x.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(x.cols()) = x;
    const auto fit = ols(b, design);
    const Eigen::VectorXd fitted = b - fit.residuals;
    m.explained = sample_variance(as_span(fitted));
    return m;
}

Eigen::VectorXd adjusted_potential(const PotentialPopulation& pop, int z) {
    return pop.y_potential(z) - pop.true_tau_cace * pop.w_potential(z);
}

MethodOutcome score(const IntervalReport& r, double true_tau) {
    MethodOutcome o;
    o.abnormal = r.abnormal;
    o.estimate = r.point.tau_hat;
    o.shape = r.set.shape;
    o.lower = r.set.has_endpoints() ? r.set.lower : std::numeric_limits<double>::quiet_NaN();
    o.upper = r.set.has_endpoints() ? r.set.upper : std::numeric_limits<double>::quiet_NaN();
    o.length = r.set.length();
    o.covered = r.set.covers(true_tau);
    return o;
}

}  // namespace

void SimConfig::validate() const {
    if (n < 4 || n % 2 != 0) throw ConfigError("n must be even and at least 4");
    if (!(p_co > 0.0 && p_co < 1.0)) throw ConfigError("p_co must lie in (0, 1)");
    if (std::llround(static_cast<double>(n) * p_co) < 1) throw ConfigError("n * p_co must be at least 1");
    if (!(std::abs(rho) < 1.0 / std::sqrt(2.0)))
        throw ConfigError("rho must satisfy |rho| < 1/sqrt(2) for a positive definite error covariance");
    if (k == 0) throw ConfigError("K must be at least 1");
    if (n / 2 < k + 2) throw ConfigError("each arm needs at least K + 2 units");
    if (reps == 0) throw ConfigError("reps must be at least 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream)
    : engine_(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

std::uint64_t RandomStream::below(std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(engine_);
}

PotentialPopulation generate_population(const SimConfig& cfg, RandomStream& rng, int* attempts) {
    cfg.validate();
    const auto n = static_cast<Eigen::Index>(cfg.n);
    const auto k = static_cast<Eigen::Index>(cfg.k);
    const double root_k = std::sqrt(static_cast<double>(cfg.k));
    const auto target = static_cast<std::size_t>(std::llround(static_cast<double>(cfg.n) * cfg.p_co));

    // Unit coefficient vectors: signal variances K, 4K and K. Each kappa makes
    // the noise variance equal the signal variance (R^2 = 0.5).
    const double kappa0 = 1.0 / std::sqrt(static_cast<double>(k));
    const double kappa1 = 1.0 / std::sqrt(4.0 * static_cast<double>(k));
    const double kappa2 = 1.0 / std::sqrt(static_cast<double>(k));

    Eigen::Matrix3d cov;
    cov << 1.0, 0.0, cfg.rho, 0.0, 1.0, cfg.rho, cfg.rho, cfg.rho, 1.0;
    Eigen::LLT<Eigen::Matrix3d> chol(cov);
    if (chol.info() != Eigen::Success) throw ConfigError("error covariance is not positive definite");
    const Eigen::Matrix3d lower = chol.matrixL();

    // Intercept of the control latent index; the always-taker share falls as p_co grows.
    const double delta0 = -((cfg.p_co - 0.5) / 0.35 + 1.0) * root_k;

    for (int attempt = 1; attempt <= max_population_attempts; ++attempt) {
        PotentialPopulation pop;
        pop.x.resize(n, k);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < k; ++j) pop.x(i, j) = rng.normal();
        pop.x.rowwise() -= pop.x.colwise().mean();

        pop.yw0.resize(n);
        pop.yw1.resize(n);
        pop.l0.resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const Eigen::Vector3d std_normal(rng.normal(), rng.normal(), rng.normal());
            const Eigen::Vector3d e = lower * std_normal;
            const double signal = pop.x.row(i).sum();
            pop.yw0[i] = signal + e[0] / kappa0;
            pop.yw1[i] = 2.0 * signal + e[1] / kappa1;
            pop.l0[i] = delta0 + signal + e[2] / kappa2;
        }

        // Distances to the threshold for units not treated under control.
        std::vector<double> gaps;
        for (Eigen::Index i = 0; i < n; ++i)
            if (pop.l0[i] <= 0.0) gaps.push_back(-pop.l0[i]);
        if (gaps.size() < target) continue;
        std::sort(gaps.begin(), gaps.end());
        const double last_in = gaps[target - 1];
        if (target < gaps.size() && gaps[target] == last_in) continue;
        const double delta1 = last_in + (target < gaps.size() ? 0.5 * (gaps[target] - last_in) : 1e-9);

        pop.l1 = pop.l0.array() + delta1;
        pop.w0.resize(cfg.n);
        pop.w1.resize(cfg.n);
        pop.group.resize(cfg.n);
        std::size_t compliers = 0;
        for (std::size_t i = 0; i < cfg.n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            pop.w0[i] = pop.l0[ii] > 0.0;
            pop.w1[i] = pop.l1[ii] > 0.0;
            pop.group[i] = classify(pop.w0[i], pop.w1[i]);
            compliers += pop.group[i] == Group::complier;
        }
        if (compliers != target) continue;

        pop.true_tau_cace = true_sample_cace(pop);
        pop.true_p_co = static_cast<double>(compliers) / static_cast<double>(cfg.n);
        if (attempts) *attempts = attempt;
        return pop;
    }
    throw ConfigError("could not calibrate " + std::to_string(target) + " compliers after " +
                      std::to_string(max_population_attempts) + " population draws");
}

Assignment complete_randomization(std::size_t n, std::size_t n1, RandomStream& rng) {
    if (n1 == 0 || n1 >= n) throw ConfigError("complete_randomization needs 0 < n1 < n");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    // Partial Fisher-Yates: the first n1 slots are a uniform n1-subset.
    for (std::size_t i = 0; i < n1; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    Assignment z(n, 0);
    for (std::size_t i = 0; i < n1; ++i) z[idx[i]] = 1;
    return z;
}

ExperimentData observe(const PotentialPopulation& pop, const Assignment& z) {
    const auto n = pop.n();
    if (z.size() != n) throw DataError("assignment length does not match the population");
    Eigen::VectorXd w(static_cast<Eigen::Index>(n)), y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const bool treated = z[i] ? pop.w1[i] : pop.w0[i];
        w[ii] = treated;
        y[ii] = treated ? pop.yw1[ii] : pop.yw0[ii];
    }
    return ExperimentData::create(z, std::move(w), std::move(y), pop.x);
}

double true_var_tau_b(const PotentialPopulation& pop, std::size_t n1) {
    const auto n = pop.n();
    if (n1 == 0 || n1 >= n) throw ConfigError("true_var_tau_b needs 0 < n1 < n");
    const Eigen::VectorXd b1 = adjusted_potential(pop, 1);
    const Eigen::VectorXd b0 = adjusted_potential(pop, 0);
    const Eigen::VectorXd diff = b1 - b0;
    return sample_variance(as_span(b1)) / static_cast<double>(n1) +
           sample_variance(as_span(b0)) / static_cast<double>(n - n1) -
           sample_variance(as_span(diff)) / static_cast<double>(n);
}

VariancePlus variance_plus(const PotentialPopulation& pop, std::size_t n1) {
    const auto n = pop.n();
    if (n1 == 0 || n1 >= n) throw ConfigError("variance_plus needs 0 < n1 < n");
    if (pop.x.cols() == 0) throw DataError("variance_plus needs covariates");
    const auto m1 = arm_moments(adjusted_potential(pop, 1), pop.x);
    const auto m0 = arm_moments(adjusted_potential(pop, 0), pop.x);
    const double inv1 = 1.0 / static_cast<double>(n1);
    const double inv0 = 1.0 / static_cast<double>(n - n1);
    return {m1.variance * inv1 + m0.variance * inv0, m1.explained * inv1 + m0.explained * inv0};
}

double pril_limit(const PotentialPopulation& pop, std::size_t n1) {
    const auto v = variance_plus(pop, n1);
    if (v.total <= 0.0) return 0.0;
    const double ratio = std::clamp(v.explained / v.total, 0.0, 1.0);
    return 1.0 - std::sqrt(1.0 - ratio);
}

double lower_median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto mid = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    return values[mid];
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CACE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

const MethodSummary& SimulationSummary::method(IntervalMethod m) const {
    for (const auto& s : methods)
        if (s.method == m) return s;
    throw std::out_of_range("unknown method");
}

ReplicateRecord evaluate_replicate(const ExperimentData& data, double true_tau, double alpha) {
    ReplicateRecord rec;
    rec.outcomes[0] = score(wald_ld_set(data, alpha), true_tau);
    rec.outcomes[1] = score(wald_delta_interval(data, alpha), true_tau);
    try {
        auto design = interacted_design(data);
        const LeastSquares ls(design.matrix, std::move(design.columns));
        const auto regs = reg_intervals(data, alpha, ls);
        for (std::size_t i = 0; i < 3; ++i) rec.outcomes[2 + i] = score(regs[i], true_tau);
    } catch (const RankDeficiencyError&) {
        for (std::size_t i = 0; i < 3; ++i) {
            MethodOutcome o;
            o.abnormal = true;
            o.estimate = o.lower = o.upper = std::numeric_limits<double>::quiet_NaN();
            o.length = std::numeric_limits<double>::infinity();
            o.shape = SetShape::whole_line;
            rec.outcomes[2 + i] = o;
        }
    }
    return rec;
}

SimulationSummary run_study(const SimConfig& cfg) {
    cfg.validate();
    RandomStream rng(cfg.seed, 0);
    int attempts = 0;
    const auto pop = generate_population(cfg, rng, &attempts);
    auto summary = run_study(cfg, pop);
    summary.population_attempts = attempts;
    return summary;
}

SimulationSummary run_study(const SimConfig& cfg, const PotentialPopulation& pop) {
    cfg.validate();
    if (pop.n() != cfg.n) throw ConfigError("population size does not match the configuration");
    const std::size_t n1 = cfg.n / 2;

    SimulationSummary s;
    s.config = cfg;
    s.true_tau_cace = pop.true_tau_cace;
    s.true_p_co = pop.true_p_co;
    s.replicates.resize(cfg.reps);

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t r = next++; r < cfg.reps; r = next++) {
            RandomStream stream(cfg.seed, r + 1);
            const auto z = complete_randomization(cfg.n, n1, stream);
            s.replicates[r] = evaluate_replicate(observe(pop, z), pop.true_tau_cace, cfg.alpha);
        }
    };
    const unsigned threads = std::min<std::size_t>(resolve_threads(cfg.threads), cfg.reps);
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    for (std::size_t m = 0; m < all_interval_methods.size(); ++m) {
        MethodSummary ms;
        ms.method = all_interval_methods[m];
        std::vector<double> errors, lengths;
        std::size_t covered = 0, abnormal = 0;
        for (const auto& rec : s.replicates) {
            const auto& o = rec.outcomes[m];
            if (o.abnormal) {
                ++abnormal;
                continue;
            }
            errors.push_back(std::abs(o.estimate - pop.true_tau_cace));
            lengths.push_back(o.length);
            covered += o.covered;
        }
        ms.valid = errors.size();
        ms.abnormal_proportion = static_cast<double>(abnormal) / static_cast<double>(cfg.reps);
        ms.mae = lower_median(errors);
        ms.median_length = lower_median(lengths);
        ms.coverage_rate = ms.valid ? static_cast<double>(covered) / static_cast<double>(ms.valid)
                                    : std::numeric_limits<double>::quiet_NaN();
        s.methods[m] = ms;
    }

    s.diagnostics.true_var_tau_b = true_var_tau_b(pop, n1);
    const auto vp = variance_plus(pop, n1);
    s.diagnostics.var_plus = vp.total;
    s.diagnostics.var_plus_given_x = vp.explained;
    s.diagnostics.pril_limit = pril_limit(pop, n1);
    s.diagnostics.empirical_pril = 1.0 - s.method(IntervalMethod::reg_ehw).median_length /
                                             s.method(IntervalMethod::wald_delta).median_length;
    return s;
}

}  // namespace cace
