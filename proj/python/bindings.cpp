#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cace/cli.hpp"
#include "cace/error.hpp"
#include "cace/estimators.hpp"
#include "cace/intervals.hpp"
#include "cace/linalg.hpp"
#include "cace/report.hpp"
#include "cace/simulation.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

cace::HcFlavor parse_flavor(const std::string& s) {
    if (s == "ehw") return cace::HcFlavor::ehw;
    if (s == "hc2") return cace::HcFlavor::hc2;
    if (s == "hc3") return cace::HcFlavor::hc3;
    throw py::value_error("flavor must be 'ehw', 'hc2' or 'hc3'");
}

cace::CovariateSelection selection_from(const py::object& covariates) {
    if (covariates.is_none()) return cace::CovariateSelection::all();
    if (py::isinstance<py::str>(covariates)) return cace::cli::parse_covariates(covariates.cast<std::string>());
    return cace::CovariateSelection::named(covariates.cast<std::vector<std::string>>());
}

cace::SimConfig make_config(std::size_t n, double p_co, double rho, std::size_t k, std::size_t reps,
                            std::uint64_t seed, double alpha, unsigned threads) {
    cace::SimConfig c;
    c.n = n;
    c.p_co = p_co;
    c.rho = rho;
    c.k = k;
    c.reps = reps;
    c.seed = seed;
    c.alpha = alpha;
    c.threads = threads;
    return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Sample complier average causal effect: Wald and regression-adjusted estimators, "
              "confidence sets and the Monte Carlo study engine.";

    auto base = py::register_exception<cace::DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<cace::RankDeficiencyError>(m, "RankDeficiencyError", base.ptr());
    py::register_exception<cace::DegenerateLeverageError>(m, "DegenerateLeverageError", base.ptr());
    py::register_exception<cace::ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<cace::ExperimentData>(m, "ExperimentData")
        .def(py::init([](const std::vector<int>& z, Eigen::VectorXd w, Eigen::VectorXd y, Eigen::MatrixXd x,
                         std::vector<std::string> names) {
                 cace::Assignment za(z.size());
                 for (std::size_t i = 0; i < z.size(); ++i) {
                     if (z[i] != 0 && z[i] != 1) throw cace::DataError("z must be 0 or 1");
                     za[i] = static_cast<std::uint8_t>(z[i]);
                 }
                 return cace::ExperimentData::create(std::move(za), std::move(w), std::move(y), std::move(x),
                                                     std::move(names));
             }),
             "z"_a, "w"_a, "y"_a, "x"_a = Eigen::MatrixXd(), "covariate_names"_a = std::vector<std::string>{})
        .def_property_readonly("n", &cace::ExperimentData::n)
        .def_property_readonly("n1", &cace::ExperimentData::n1)
        .def_property_readonly("n0", &cace::ExperimentData::n0)
        .def_property_readonly("k", &cace::ExperimentData::k)
        .def_property_readonly("z", [](const cace::ExperimentData& d) {
            return std::vector<int>(d.z().begin(), d.z().end());
        })
        .def_property_readonly("w", &cace::ExperimentData::w)
        .def_property_readonly("y", &cace::ExperimentData::y)
        .def_property_readonly("x", &cace::ExperimentData::x)
        .def_property_readonly("covariate_names", &cace::ExperimentData::covariate_names)
        .def_property_readonly("covariate_means", &cace::ExperimentData::covariate_means);

    m.def("load_csv", [](const std::filesystem::path& path, const py::object& covariates) {
        return cace::load_csv(path, selection_from(covariates));
    }, "path"_a, "covariates"_a = py::none());

    m.def("difference_in_means", [](const Eigen::VectorXd& q, const std::vector<int>& z) {
        cace::Assignment za(z.begin(), z.end());
        return cace::difference_in_means(q, za);
    }, "q"_a, "z"_a);
    m.def("sample_variance", [](const Eigen::VectorXd& q) { return cace::sample_variance(cace::as_span(q)); });
    m.def("sample_covariance", [](const Eigen::VectorXd& q, const Eigen::VectorXd& r) {
        return cace::sample_covariance(cace::as_span(q), cace::as_span(r));
    });

    py::class_<cace::OlsFit>(m, "OlsFit")
        .def_readonly("coefficients", &cace::OlsFit::coefficients)
        .def_readonly("residuals", &cace::OlsFit::residuals)
        .def_readonly("leverages", &cace::OlsFit::leverages)
        .def_readonly("design_columns", &cace::OlsFit::design_columns);
    m.def("ols", &cace::ols, "response"_a, "design"_a, "columns"_a = std::vector<std::string>{});

    py::class_<cace::PointEstimate>(m, "PointEstimate")
        .def_property_readonly("method", [](const cace::PointEstimate& p) { return std::string(cace::to_string(p.method)); })
        .def_readonly("tau_hat", &cace::PointEstimate::tau_hat)
        .def_readonly("tau_w_hat", &cace::PointEstimate::tau_w_hat)
        .def_readonly("tau_y_hat", &cace::PointEstimate::tau_y_hat)
        .def_readonly("abnormal", &cace::PointEstimate::abnormal);
    m.def("wald_estimate", &cace::wald_estimate, "data"_a);
    m.def("reg_estimate", py::overload_cast<const cace::ExperimentData&>(&cace::reg_estimate), "data"_a);

    py::class_<cace::ConfidenceSet>(m, "ConfidenceSet")
        .def_property_readonly("shape", [](const cace::ConfidenceSet& s) { return std::string(cace::to_string(s.shape)); })
        .def_readonly("lower", &cace::ConfidenceSet::lower)
        .def_readonly("upper", &cace::ConfidenceSet::upper)
        .def_readonly("alpha", &cace::ConfidenceSet::alpha)
        .def("covers", &cace::ConfidenceSet::covers)
        .def("length", &cace::ConfidenceSet::length)
        .def("__repr__", [](const cace::ConfidenceSet& s) {
            return "ConfidenceSet(shape=" + std::string(cace::to_string(s.shape)) + ", lower=" +
                   std::to_string(s.lower) + ", upper=" + std::to_string(s.upper) + ")";
        });

    py::class_<cace::IntervalReport>(m, "IntervalReport")
        .def_property_readonly("method", [](const cace::IntervalReport& r) { return std::string(cace::to_string(r.method)); })
        .def_readonly("point", &cace::IntervalReport::point)
        .def_readonly("set", &cace::IntervalReport::set)
        .def_readonly("variance_numerator", &cace::IntervalReport::variance_numerator)
        .def_readonly("abnormal", &cace::IntervalReport::abnormal);

    m.def("normal_quantile", &cace::normal_quantile, "p"_a);
    m.def("solve_quadratic_leq", &cace::solve_quadratic_leq, "a"_a, "b"_a, "d"_a, "alpha"_a = 0.05);
    m.def("wald_ld_set", &cace::wald_ld_set, "data"_a, "alpha"_a = 0.05);
    m.def("wald_delta_interval", &cace::wald_delta_interval, "data"_a, "alpha"_a = 0.05);
    m.def("reg_interval", [](const cace::ExperimentData& d, double alpha, const std::string& flavor) {
        return cace::reg_interval(d, alpha, parse_flavor(flavor));
    }, "data"_a, "alpha"_a = 0.05, "flavor"_a = "ehw");
    m.def("estimate_json", [](const cace::ExperimentData& d, const std::vector<std::string>& methods, double alpha) {
        std::vector<cace::IntervalMethod> ms;
        for (const auto& name : methods) ms.push_back(cace::cli::parse_methods(name).front());
        return cace::dump_canonical(cace::estimate_json(d, cace::cli::estimate_all(d, ms, alpha)));
    }, "data"_a, "methods"_a = std::vector<std::string>{}, "alpha"_a = 0.05);

    py::class_<cace::PotentialPopulation>(m, "PotentialPopulation")
        .def_readonly("x", &cace::PotentialPopulation::x)
        .def_readonly("yw0", &cace::PotentialPopulation::yw0)
        .def_readonly("yw1", &cace::PotentialPopulation::yw1)
        .def_readonly("l0", &cace::PotentialPopulation::l0)
        .def_readonly("l1", &cace::PotentialPopulation::l1)
        .def_property_readonly("w0", [](const cace::PotentialPopulation& p) { return std::vector<int>(p.w0.begin(), p.w0.end()); })
        .def_property_readonly("w1", [](const cace::PotentialPopulation& p) { return std::vector<int>(p.w1.begin(), p.w1.end()); })
        .def_readonly("true_tau_cace", &cace::PotentialPopulation::true_tau_cace)
        .def_readonly("true_p_co", &cace::PotentialPopulation::true_p_co)
        .def_property_readonly("n", &cace::PotentialPopulation::n);

    m.def("generate_population", [](std::size_t n, double p_co, double rho, std::size_t k, std::uint64_t seed) {
        cace::RandomStream rng(seed, 0);
        return cace::generate_population(make_config(n, p_co, rho, k, 1, seed, 0.05, 1), rng);
    }, "n"_a = 400, "p_co"_a = 0.5, "rho"_a = 0.0, "k"_a = 5, "seed"_a = 1);
    m.def("true_var_tau_b", &cace::true_var_tau_b, "pop"_a, "n1"_a);
    m.def("pril_limit", &cace::pril_limit, "pop"_a, "n1"_a);

    m.def("run_study_json", [](std::size_t n, double p_co, double rho, std::size_t k, std::size_t reps,
                               std::uint64_t seed, double alpha, unsigned threads) {
        const auto cfg = make_config(n, p_co, rho, k, reps, seed, alpha, threads);
        cace::SimulationSummary summary;
        {
            py::gil_scoped_release release;
            summary = cace::run_study(cfg);
        }
        return cace::dump_canonical(cace::to_json(summary));
    }, "n"_a = 400, "p_co"_a = 0.5, "rho"_a = 0.0, "k"_a = 5, "reps"_a = 1000, "seed"_a = 1, "alpha"_a = 0.05,
       "threads"_a = 0);

#ifdef CACE_VERSION
    m.attr("__version__") = CACE_VERSION;
#else
    m.attr("__version__") = "dev";
#endif
}
