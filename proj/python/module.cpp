#include "sabc/abc_engine.hpp"
#include "sabc/bayes_linear.hpp"
#include "sabc/config.hpp"
#include "sabc/empirical.hpp"
#include "sabc/error.hpp"
#include "sabc/gpd.hpp"
#include "sabc/marginal_adjust.hpp"
#include "sabc/parallel.hpp"
#include "sabc/regression.hpp"
#include "sabc/semiauto.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace sabc;

namespace {

RunConfig config_from(const std::string& text) { return parse_config_json(nlohmann::json::parse(text)); }

BasisSpec basis_from(const std::string& kind, int degree, const std::vector<std::vector<int>>& exponents) {
    if (kind == "identity") return BasisSpec::identity();
    if (kind == "polynomial") return BasisSpec::polynomial(degree);
    if (kind == "powers") return BasisSpec::powers(exponents);
    throw ValidationError("unknown basis kind '" + kind + "'");
}

py::dict posterior_dict(const WeightedPosterior& p) {
    py::dict d;
    d["thetas"] = p.thetas;
    d["weights"] = p.weights;
    d["indices"] = p.acceptance.indices;
    d["epsilon"] = p.acceptance.epsilon;
    d["stage"] = p.provenance.stage;
    d["projector_id"] = p.provenance.projector_id;
    if (p.provenance.condition_number) d["condition_number"] = *p.provenance.condition_number;
    return d;
}

WeightedPosterior uniform_posterior(const Matrix& thetas) {
    WeightedPosterior p;
    p.thetas = thetas;
    p.weights = Vector::Constant(thetas.rows(), 1.0 / static_cast<double>(thetas.rows()));
    return p;
}

}  // namespace

PYBIND11_MODULE(_sabc, m) {
    m.doc() = "Semi-automatic ABC with Bayes linear estimation";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

    m.def("set_threads", &set_thread_count, py::arg("n"));

    py::class_<BayesLinearModel>(m, "BayesLinearModel")
        .def_readonly("intercept", &BayesLinearModel::intercept)
        .def_readonly("coefficients", &BayesLinearModel::coefficients)
        .def_readonly("mean_theta", &BayesLinearModel::mean_theta)
        .def_readonly("var_theta", &BayesLinearModel::var_theta)
        .def_readonly("var_stats", &BayesLinearModel::var_stats)
        .def_readonly("cov_theta_stats", &BayesLinearModel::cov_theta_stats)
        .def("adjusted_expectation", [](const BayesLinearModel& b, const Vector& s) { return adjusted_expectation(b, s); })
        .def("adjusted_variance", [](const BayesLinearModel& b) { return adjusted_variance(b).value; });

    m.def("fit_bayes_linear", py::overload_cast<const Matrix&, const Matrix&>(&fit_bayes_linear), py::arg("thetas"),
          py::arg("stats"));
    m.def("criterion_value", py::overload_cast<const Vector&, const Matrix&, const Matrix&, const Matrix&>(&criterion_value),
          py::arg("a"), py::arg("b"), py::arg("thetas"), py::arg("stats"));

    m.def(
        "expand_basis",
        [](const Vector& s, const std::string& kind, int degree, const std::vector<std::vector<int>>& exponents) {
            return expand_basis(s, basis_from(kind, degree, exponents));
        },
        py::arg("s"), py::arg("kind") = "identity", py::arg("degree") = 1,
        py::arg("exponents") = std::vector<std::vector<int>>{});

    m.def(
        "fit_linear",
        [](const Matrix& design, const Matrix& responses, double ridge) {
            const LinearFit f = fit_linear(design, responses, ridge);
            py::dict d;
            d["intercept"] = f.intercept;
            d["coefficients"] = f.coefficients;
            d["residual_mss"] = f.residual_mss;
            d["condition_number"] = f.condition_number;
            d["vifs"] = f.vifs;
            return d;
        },
        py::arg("design"), py::arg("responses"), py::arg("ridge_lambda") = 0.0);

    m.def(
        "condition_diagnostics",
        [](const Matrix& design) {
            const auto c = condition_diagnostics(design);
            return py::make_tuple(c.condition_number, c.vifs);
        },
        py::arg("design"));

    m.def(
        "rejection_abc",
        [](const Matrix& thetas, const Matrix& stats, const Vector& s_obs, std::optional<double> fraction,
           std::optional<double> epsilon) {
            if (fraction.has_value() == epsilon.has_value())
                throw ValidationError("give exactly one of fraction or epsilon");
            const Acceptance a = fraction ? Acceptance::fraction(*fraction) : Acceptance::epsilon(*epsilon);
            return posterior_dict(rejection_abc(thetas, stats, s_obs, a));
        },
        py::arg("thetas"), py::arg("stats"), py::arg("s_obs"), py::arg("fraction") = py::none(),
        py::arg("epsilon") = py::none());

    m.def(
        "regression_adjust",
        [](const Matrix& thetas, const Matrix& stats, const Vector& s_obs, double ridge) {
            return posterior_dict(regression_adjust(uniform_posterior(thetas), stats, s_obs, ridge));
        },
        py::arg("thetas"), py::arg("stats"), py::arg("s_obs"), py::arg("ridge_lambda") = 0.0);

    m.def(
        "marginal_remap",
        [](const Matrix& joint, const std::vector<Vector>& marginals) {
            std::vector<MarginalEstimate> est;
            for (std::size_t i = 0; i < marginals.size(); ++i) est.push_back({i, marginals[i], {}, 0.0});
            return marginal_remap(uniform_posterior(joint), est).thetas;
        },
        py::arg("joint"), py::arg("marginals"));

    m.def("spearman_matrix", &spearman_matrix, py::arg("samples"));
    m.def("gpd_quantile", &gpd::quantile, py::arg("sigma"), py::arg("xi"), py::arg("tau"));

    m.def(
        "canonical_config",
        [](const std::string& text) { return config_to_json(config_from(text)).dump(); }, py::arg("config_json"));
    m.def(
        "config_hash", [](const std::string& text) { return config_hash(config_from(text)); }, py::arg("config_json"));

    m.def(
        "simulate",
        [](const std::string& text, std::size_t m, std::uint64_t seed) {
            const ModelFixture fx = build_fixture(config_from(text));
            const SimulationBatch b = simulate_batch(fx.prior, fx.simulator, m, seed);
            return py::make_tuple(b.thetas, b.stats);
        },
        py::arg("config_json"), py::arg("m"), py::arg("seed"));

    m.def(
        "run_semiauto",
        [](const std::string& text) {
            const RunConfig cfg = config_from(text);
            const ModelFixture fx = build_fixture(cfg);
            const SemiautoResult r = run_semiauto(fx, pipeline_settings(cfg));
            py::dict d = posterior_dict(r.infer.final_posterior());
            py::list est;
            for (const auto& e : r.infer.estimates) {
                py::dict row;
                row["target"] = e.name;
                row["estimate"] = e.estimate;
                row["mc_sd"] = e.mc_sd;
                row["oracle"] = e.oracle ? py::cast(*e.oracle) : py::none();
                est.append(row);
            }
            d["estimates"] = est;
            d["region_lo"] = r.pilot.region.lo;
            d["region_hi"] = r.pilot.region.hi;
            return d;
        },
        py::arg("config_json"));
}
