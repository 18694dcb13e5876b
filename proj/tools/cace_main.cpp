// Command-line front end: `cace estimate` on a CSV dataset, `cace simulate`
// for Monte Carlo studies.

#include <iostream>

#include "CLI11.hpp"

#include "cace/cli.hpp"
#include "cace/error.hpp"

int main(int argc, char** argv) {
    using namespace cace;

    CLI::App app{"Sample complier average causal effect: estimation and simulation"};
    app.require_subcommand(1);

    const std::map<std::string, cli::Format> formats{{"json", cli::Format::json}, {"text", cli::Format::text}};

    cli::EstimateRequest est;
    std::string methods = "all";
    std::string covariates = "auto";
    auto* estimate = app.add_subcommand("estimate", "Point estimates and confidence sets for a CSV dataset");
    estimate->add_option("--input", est.input, "CSV with columns z, w, y and optional covariates")
        ->required()
        ->check(CLI::ExistingFile);
    estimate->add_option("--methods", methods, "all, or a list of wald-ld,wald-delta,reg-ehw,reg-hc2,reg-hc3");
    estimate->add_option("--alpha", est.alpha, "1 - confidence level")->capture_default_str();
    estimate->add_option("--covariates", covariates, "auto, none, or a comma-separated column list");
    estimate->add_option("--format", est.format, "json or text")->transform(CLI::CheckedTransformer(formats));

    cli::SimulateRequest sim;
    std::string dump;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo study over complete randomizations");
    simulate->add_option("--n", sim.config.n, "number of units (even)")->capture_default_str();
    simulate->add_option("--pco", sim.config.p_co, "complier fraction")->capture_default_str();
    simulate->add_option("--rho", sim.config.rho, "error correlation")->capture_default_str();
    simulate->add_option("--k", sim.config.k, "number of covariates")->capture_default_str();
    simulate->add_option("--reps", sim.config.reps, "number of randomizations")->capture_default_str();
    simulate->add_option("--seed", sim.config.seed, "random seed")->capture_default_str();
    simulate->add_option("--alpha", sim.config.alpha, "1 - confidence level")->capture_default_str();
    simulate->add_option("--format", sim.format, "json or text")->transform(CLI::CheckedTransformer(formats));
    simulate->add_option("--dump-replicates", dump, "write per-replicate results as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::exit_invalid;
    }

    if (*estimate) {
        try {
            if (methods != "all") est.methods = cli::parse_methods(methods);
            est.covariates = cli::parse_covariates(covariates);
        } catch (const DataError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return cli::exit_invalid;
        }
        return cli::run_estimate(est, std::cout, std::cerr);
    }
    if (!dump.empty()) sim.dump_replicates = dump;
    return cli::run_simulate(sim, std::cout, std::cerr);
}
