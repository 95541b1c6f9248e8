#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lagsieve/densities.hpp"
#include "lagsieve/distances.hpp"
#include "lagsieve/errors.hpp"
#include "lagsieve/estimator.hpp"
#include "lagsieve/features.hpp"
#include "lagsieve/io.hpp"
#include "lagsieve/laguerre.hpp"
#include "lagsieve/simulator.hpp"
#include "lagsieve/transmission.hpp"

namespace py = pybind11;
using namespace lagsieve;

namespace {

// Densities arrive from Python as descriptor strings or LaguerreDensity
// objects.
GenericDensity to_generic(const py::object& o) {
    if (py::isinstance<py::str>(o)) return GenericDensity::parse(o.cast<std::string>());
    if (py::isinstance<LaguerreDensity>(o)) return GenericDensity(o.cast<LaguerreDensity>());
    if (py::isinstance<GenericDensity>(o)) return o.cast<GenericDensity>();
    throw ValidationError("expected a density descriptor string or a LaguerreDensity");
}

py::object json_to_py(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

GeneratorConfig config_from(const py::dict& kw) {
    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : kw) kv[py::str(k)] = py::str(v);
    return generator_config_from(kv);
}

}  // namespace

PYBIND11_MODULE(_lagsieve, m) {
    m.doc() = "Laguerre sieve estimation of incubation and generation time densities";
    m.attr("__version__") = kVersion;

    auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<DegenerateError>(m, "DegenerateError", numerical);
    py::register_exception<DivergentIntegralError>(m, "DivergentIntegralError", numerical);
    py::register_exception<AccuracyError>(m, "AccuracyError", numerical);
    py::register_exception<UnsupportedDegreeError>(m, "UnsupportedDegreeError", validation);

    m.def("laguerre_eval", &laguerre_eval, py::arg("k"), py::arg("x"));
    m.def(
        "angles_to_theta", [](const std::vector<double>& a) { return angles_to_theta(a); }, py::arg("angles"));
    m.def(
        "theta_to_angles", [](const std::vector<double>& t) { return theta_to_angles(t); }, py::arg("theta"));

    py::class_<LaguerreDensity>(m, "LaguerreDensity")
        .def(py::init<>())
        .def(py::init<std::vector<double>>(), py::arg("theta"))
        .def_static("from_coefficients", &LaguerreDensity::from_coefficients, py::arg("coefficients"))
        .def_static(
            "from_angles", [](const std::vector<double>& a) { return LaguerreDensity::from_angles(a); },
            py::arg("angles"))
        .def_property_readonly("degree", &LaguerreDensity::degree)
        .def_property_readonly("theta", &LaguerreDensity::theta)
        .def("pdf", &LaguerreDensity::pdf, py::arg("x"))
        .def("cdf", &LaguerreDensity::cdf, py::arg("x"))
        .def("survival", &LaguerreDensity::survival, py::arg("x"))
        .def("quantile", &LaguerreDensity::quantile, py::arg("p"))
        .def("exp_tilted_integral", &LaguerreDensity::exp_tilted_integral, py::arg("r"))
        .def("__repr__", [](const LaguerreDensity& d) { return "LaguerreDensity(" + to_json(d).dump() + ")"; });

    py::class_<GenericDensity>(m, "Density")
        .def(py::init([](const py::object& o) { return to_generic(o); }), py::arg("density"))
        .def("pdf", &GenericDensity::pdf, py::arg("x"))
        .def("cdf", &GenericDensity::cdf, py::arg("x"))
        .def("quantile", &GenericDensity::quantile, py::arg("p"))
        .def_property_readonly("descriptor", &GenericDensity::descriptor)
        .def("__repr__", [](const GenericDensity& d) { return "Density('" + d.descriptor() + "')"; });

    m.def(
        "hellinger_sq", [](const py::object& f, const py::object& g) { return hellinger_sq(to_generic(f), to_generic(g)); },
        py::arg("f"), py::arg("g"));
    m.def(
        "rho_alpha",
        [](const py::object& f, const py::object& g, double a) { return rho_alpha(to_generic(f), to_generic(g), a); },
        py::arg("f"), py::arg("g"), py::arg("alpha"));
    m.def(
        "best_approx",
        [](const py::object& phi, int deg, bool refine) {
            ApproximationOptions o;
            o.refine = refine;
            return best_approx(to_generic(phi), deg, o);
        },
        py::arg("density"), py::arg("m"), py::arg("refine") = false);

    py::class_<Observation>(m, "Observation")
        .def(py::init([](double s1, double s2, double w, int loc, std::string id) {
                 return Observation{std::move(id), s1, s2, w, loc};
             }),
             py::arg("s1"), py::arg("s2"), py::arg("w_tilde"), py::arg("location") = 0, py::arg("id") = "")
        .def_readwrite("id", &Observation::id)
        .def_readwrite("s1", &Observation::s1)
        .def_readwrite("s2", &Observation::s2)
        .def_readwrite("w_tilde", &Observation::w_tilde)
        .def_readwrite("location", &Observation::location)
        .def("__repr__", [](const Observation& o) {
            return "Observation(s1=" + format_number(o.s1) + ", s2=" + format_number(o.s2) +
                   ", w_tilde=" + format_number(o.w_tilde) + ", location=" + std::to_string(o.location) + ")";
        });

    py::class_<ExposureModel>(m, "ExposureModel")
        .def(py::init<std::map<int, double>>(), py::arg("rates"))
        .def("rate", &ExposureModel::rate, py::arg("location"))
        .def_property_readonly("rates", &ExposureModel::rates);

    py::class_<QuadratureConfig>(m, "QuadratureConfig")
        .def(py::init<>())
        .def_readwrite("nodes_t", &QuadratureConfig::nodes_t)
        .def_readwrite("nodes_y", &QuadratureConfig::nodes_y)
        .def_readwrite("log_floor", &QuadratureConfig::log_floor);

    m.def("obs_loglik", &obs_loglik, py::arg("observation"), py::arg("exposure"), py::arg("phi_i"), py::arg("phi_g"),
          py::arg("quadrature") = QuadratureConfig{});
    m.def(
        "dataset_loglik",
        [](const std::vector<Observation>& d, const ExposureModel& em, const LaguerreDensity& a, const LaguerreDensity& b,
           const QuadratureConfig& q) { return dataset_loglik(d, em, a, b, q); },
        py::arg("data"), py::arg("exposure"), py::arg("phi_i"), py::arg("phi_g"), py::arg("quadrature") = QuadratureConfig{});

    py::class_<FitOptions>(m, "FitOptions")
        .def(py::init<>())
        .def_readwrite("n_starts", &FitOptions::n_starts)
        .def_readwrite("max_iters", &FitOptions::max_iters)
        .def_readwrite("simplex_tol", &FitOptions::simplex_tol)
        .def_readwrite("seed", &FitOptions::seed)
        .def_readwrite("polish_restarts", &FitOptions::polish_restarts)
        .def_readwrite("bic_counts_coefficients", &FitOptions::bic_counts_coefficients)
        .def_readwrite("quadrature", &FitOptions::quadrature);

    py::class_<FitResult>(m, "FitResult")
        .def_readonly("phi_i", &FitResult::phi_i_hat)
        .def_readonly("phi_g", &FitResult::phi_g_hat)
        .def_readonly("loglik", &FitResult::loglik)
        .def_readonly("bic", &FitResult::bic)
        .def_readonly("n", &FitResult::n)
        .def_property_readonly("m1", &FitResult::m1)
        .def_property_readonly("m2", &FitResult::m2)
        .def(
            "to_json", [](const FitResult& f, const ExposureModel& em) { return to_json(f, em).dump(2); },
            py::arg("exposure"));

    m.def(
        "fit",
        [](const std::vector<Observation>& d, const ExposureModel& em, int m1, int m2, const FitOptions& o) {
            py::gil_scoped_release release;
            return fit(d, em, m1, m2, o);
        },
        py::arg("data"), py::arg("exposure"), py::arg("m1"), py::arg("m2"), py::arg("options") = FitOptions{});
    m.def("bic", &bic, py::arg("loglik"), py::arg("m1"), py::arg("m2"), py::arg("n"),
          py::arg("count_coefficients") = false);
    m.def("parse_grid", &parse_grid, py::arg("spec"));
    m.def(
        "select_model",
        [](const std::vector<Observation>& d, const ExposureModel& em, const std::string& grid, const FitOptions& o) {
            Selection s;
            {
                py::gil_scoped_release release;
                s = select_model(d, em, parse_grid(grid), o);
            }
            return json_to_py(to_json(s));
        },
        py::arg("data"), py::arg("exposure"), py::arg("grid") = "1..4x1..4", py::arg("options") = FitOptions{});

    m.def("reproduction_number", py::overload_cast<const LaguerreDensity&, double>(&reproduction_number),
          py::arg("phi_g"), py::arg("growth_rate"));
    m.def("presymptomatic_prob", &presymptomatic_prob, py::arg("phi_i"), py::arg("phi_g"));
    m.def(
        "feature_report",
        [](const FitResult& f, double r, const std::vector<double>& probs) {
            return json_to_py(to_json(feature_report(f, r, probs)));
        },
        py::arg("fit"), py::arg("growth_rate"), py::arg("probs") = kDefaultFeatureProbs);

    m.def(
        "sample_dataset",
        [](const py::kwargs& kw) { return sample_dataset(config_from(kw)); },
        "Synthetic observations. Keyword arguments use the config file keys, e.g. n=40, seed=3, "
        "incubation='lognormal:1.644,0.363'.");
    m.def(
        "run_study",
        [](int m1, int m2, std::size_t reps, double r, int threads, const py::kwargs& kw) {
            const GeneratorConfig cfg = config_from(kw);
            MonteCarloOptions o;
            o.threads = threads;
            StudyReport rep;
            {
                py::gil_scoped_release release;
                rep = run_study(cfg, m1, m2, reps, r, o);
            }
            return json_to_py(to_json(rep));
        },
        py::arg("m1"), py::arg("m2"), py::arg("reps"), py::arg("growth_rate"), py::arg("threads") = 0);
    m.def(
        "bootstrap_test",
        [](const FitResult& f, const py::object& h0_i, const py::object& h0_g, std::size_t sims, int threads,
           const py::kwargs& kw) {
            const GeneratorConfig cfg = config_from(kw);
            const GenericDensity a = to_generic(h0_i), b = to_generic(h0_g);
            MonteCarloOptions o;
            o.threads = threads;
            BootstrapResult res;
            {
                py::gil_scoped_release release;
                res = bootstrap_test(f, a, b, cfg, sims, o);
            }
            return json_to_py(to_json(res));
        },
        py::arg("fit"), py::arg("h0_i"), py::arg("h0_g"), py::arg("n_sims"), py::arg("threads") = 0);

    m.def(
        "read_csv",
        [](const std::string& path, double lookback) {
            IngestResult r = ingest_csv(path, lookback);
            py::list errors;
            for (const RecordError& e : r.errors) errors.append(py::make_tuple(e.index, e.id, e.reason));
            return py::make_tuple(r.observations, errors);
        },
        py::arg("path"), py::arg("lookback") = 60.0);
    m.def(
        "write_csv", [](const std::string& path, const std::vector<Observation>& d) { write_dataset_csv(path, d); },
        py::arg("path"), py::arg("data"));
}
