#include "sabc/config.hpp"

#include "sabc/error.hpp"
#include "sabc/persist.hpp"
#include "sabc/util.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace sabc {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
    throw ValidationError(path + ": " + message);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

std::string indexed(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

std::uint64_t as_u64(const json& j, const std::string& path) {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) {
        if (j.get<std::int64_t>() < 0) fail(path, "must be nonnegative");
        return static_cast<std::uint64_t>(j.get<std::int64_t>());
    }
    if (j.is_number_float()) {
        const double v = j.get<double>();
        if (v >= 0 && v == std::floor(v) && v < 9.007199254740992e15) return static_cast<std::uint64_t>(v);
    }
    fail(path, "expected a nonnegative integer");
}

std::size_t as_size(const json& j, const std::string& path) { return static_cast<std::size_t>(as_u64(j, path)); }

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

const json& as_array(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    return j;
}

std::vector<double> as_doubles(const json& j, const std::string& path) {
    std::vector<double> out;
    for (std::size_t i = 0; i < as_array(j, path).size(); ++i) out.push_back(as_double(j[i], indexed(path, i)));
    return out;
}

/// Object reader that records consumed keys and rejects leftovers.
class Fields {
public:
    Fields(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
    }

    const json* get(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& require(const std::string& key) {
        const json* v = get(key);
        if (!v) fail(join(path_, key), "missing required key");
        return *v;
    }

    std::string at(const std::string& key) const { return join(path_, key); }

    double number(const std::string& key, double fallback) {
        const json* v = get(key);
        return v ? as_double(*v, at(key)) : fallback;
    }
    std::size_t count(const std::string& key, std::size_t fallback) {
        const json* v = get(key);
        return v ? as_size(*v, at(key)) : fallback;
    }
    bool flag(const std::string& key, bool fallback) {
        const json* v = get(key);
        return v ? as_bool(*v, at(key)) : fallback;
    }
    std::string text(const std::string& key, std::string fallback) {
        const json* v = get(key);
        return v ? as_string(*v, at(key)) : fallback;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) fail(join(path_, it.key()), "unknown key");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

void check_positive(double v, const std::string& path) {
    if (!(v > 0)) fail(path, "must be positive, got " + format_double(v));
}

void check_fraction(double v, const std::string& path) {
    if (!(v > 0 && v <= 1)) fail(path, "must be in (0, 1], got " + format_double(v));
}

void check_min_count(std::size_t v, std::size_t min, const std::string& path) {
    if (v < min) fail(path, "must be at least " + std::to_string(min) + ", got " + std::to_string(v));
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

json vector_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Matrix parse_matrix(const json& j, const std::string& path) {
    as_array(j, path);
    if (j.empty()) fail(path, "must be nonempty");
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < j.size(); ++r) rows.push_back(as_doubles(j[r], indexed(path, r)));
    const std::size_t cols = rows[0].size();
    if (cols == 0) fail(path, "rows must be nonempty");
    Matrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != cols) fail(indexed(path, r), "ragged matrix row");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = rows[r][c];
    }
    return m;
}

Vector parse_vector(const json& j, const std::string& path) {
    const auto v = as_doubles(j, path);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

// --- model parameters -------------------------------------------------------

struct ModelShape {
    std::size_t param_dim;
    std::size_t stat_dim;
};

json gaussian_params(const json* j, const std::string& path) {
    GaussianLocationParams d;
    json empty = json::object();
    Fields f(j ? *j : empty, path);
    json out;
    out["mu0"] = f.number("mu0", d.mu0);
    out["tau0"] = f.number("tau0", d.tau0);
    out["sigma"] = f.number("sigma", d.sigma);
    out["n"] = f.count("n", d.n);
    out["xbar_obs"] = f.number("xbar_obs", d.xbar_obs);
    out["n_noise_stats"] = f.count("n_noise_stats", d.n_noise_stats);
    f.finish();
    check_positive(out["tau0"].get<double>(), f.at("tau0"));
    check_positive(out["sigma"].get<double>(), f.at("sigma"));
    check_min_count(out["n"].get<std::size_t>(), 2, f.at("n"));
    return out;
}

json linear_params(const json* j, const std::string& path) {
    if (!j) fail(path, "missing required key");
    Fields f(*j, path);
    const Matrix h = parse_matrix(f.require("h"), f.at("h"));
    const auto p = h.cols();
    const double noise_sd = f.number("noise_sd", 1.0);
    check_positive(noise_sd, f.at("noise_sd"));
    Vector mean = Vector::Zero(p);
    if (const json* v = f.get("prior_mean")) mean = parse_vector(*v, f.at("prior_mean"));
    Matrix cov = Matrix::Identity(p, p);
    if (const json* v = f.get("prior_cov")) cov = parse_matrix(*v, f.at("prior_cov"));
    const Vector s_obs = parse_vector(f.require("s_obs"), f.at("s_obs"));
    const std::size_t n_noise = f.count("n_noise_stats", 0);
    f.finish();

    LinearGaussianParams lp{h, noise_sd, mean, cov, s_obs, n_noise};
    try {
        lp.validate();
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
    json out;
    out["h"] = matrix_json(h);
    out["noise_sd"] = noise_sd;
    out["prior_mean"] = vector_json(mean);
    out["prior_cov"] = matrix_json(cov);
    out["s_obs"] = vector_json(s_obs);
    out["n_noise_stats"] = n_noise;
    return out;
}

json gpd_params(const json* j, const std::string& path) {
    GpdParams d;
    json empty = json::object();
    Fields f(j ? *j : empty, path);
    json out;
    out["sigma_true"] = f.number("sigma_true", d.sigma_true);
    out["xi_true"] = f.number("xi_true", d.xi_true);
    out["n_exceedances"] = f.count("n_exceedances", d.n_exceedances);
    std::vector<double> taus = d.tau_grid;
    if (const json* v = f.get("tau_grid")) taus = as_doubles(*v, f.at("tau_grid"));
    out["tau_grid"] = taus;
    const json* seed = f.get("obs_seed");
    out["obs_seed"] = seed ? as_u64(*seed, f.at("obs_seed")) : d.obs_seed;
    out["grid_points"] = f.count("grid_points", d.grid_points);
    // A reused dataset is inlined so the config hash covers its content.
    const json* inline_data = f.get("observed_data");
    const json* csv = f.get("observed_csv");
    if (inline_data && csv) fail(f.at("observed_csv"), "give either observed_data or observed_csv, not both");
    std::vector<double> observed;
    if (inline_data) observed = as_doubles(*inline_data, f.at("observed_data"));
    if (csv) {
        const Matrix x = read_observed_csv(as_string(*csv, f.at("observed_csv")));
        if (x.cols() != 1) fail(f.at("observed_csv"), "expected a single data column x_1");
        observed.assign(x.data(), x.data() + x.rows());
    }
    if (inline_data || csv) {
        if (observed.size() < 2) fail(f.at(csv ? "observed_csv" : "observed_data"), "need at least 2 observations");
        for (std::size_t i = 0; i < observed.size(); ++i)
            if (!(observed[i] >= 0)) fail(indexed(f.at(csv ? "observed_csv" : "observed_data"), i), "must be >= 0");
        out["observed_data"] = observed;
        out["n_exceedances"] = observed.size();
    }
    f.finish();
    check_positive(out["sigma_true"].get<double>(), f.at("sigma_true"));
    check_min_count(out["n_exceedances"].get<std::size_t>(), 2, f.at("n_exceedances"));
    check_min_count(out["grid_points"].get<std::size_t>(), 3, f.at("grid_points"));
    if (taus.empty()) fail(f.at("tau_grid"), "must be nonempty");
    for (std::size_t i = 0; i < taus.size(); ++i)
        if (!(taus[i] > 0 && taus[i] < 1)) fail(indexed(f.at("tau_grid"), i), "must be in (0, 1)");
    return out;
}

json two_point_params(const json* j, const std::string& path) {
    json empty = json::object();
    Fields f(j ? *j : empty, path);
    json out;
    out["flip_prob"] = f.number("flip_prob", 0.0);
    f.finish();
    const double q = out["flip_prob"].get<double>();
    if (!(q >= 0 && q < 0.5)) fail(f.at("flip_prob"), "must be in [0, 0.5)");
    return out;
}

json canonical_model_params(const std::string& name, const json* params, const std::string& path) {
    if (name == "gaussian_location") return gaussian_params(params, path);
    if (name == "linear_gaussian") return linear_params(params, path);
    if (name == "gpd") return gpd_params(params, path);
    if (name == "two_point") return two_point_params(params, path);
    fail("model.name", "unknown model '" + name + "' (expected gaussian_location, linear_gaussian, gpd, two_point)");
}

ModelShape model_shape(const std::string& name, const json& p) {
    if (name == "gaussian_location") return {1, 2 + p["n_noise_stats"].get<std::size_t>()};
    if (name == "linear_gaussian")
        return {p["h"][0].size(), p["h"].size() + p["n_noise_stats"].get<std::size_t>()};
    if (name == "gpd") return {2, kGpdStatDim};
    return {1, 1};
}

// --- prior overrides --------------------------------------------------------

json canonical_prior_entry(const json& j, const std::string& path) {
    Fields f(j, path);
    const std::string kind = as_string(f.require("kind"), f.at("kind"));
    json out;
    out["kind"] = kind;
    if (kind == "normal") {
        out["mean"] = as_double(f.require("mean"), f.at("mean"));
        out["sd"] = as_double(f.require("sd"), f.at("sd"));
        check_positive(out["sd"].get<double>(), f.at("sd"));
    } else if (kind == "uniform") {
        out["lo"] = as_double(f.require("lo"), f.at("lo"));
        out["hi"] = as_double(f.require("hi"), f.at("hi"));
        if (!(out["lo"].get<double>() < out["hi"].get<double>())) fail(f.at("hi"), "must exceed lo");
    } else if (kind == "lognormal") {
        out["mu"] = as_double(f.require("mu"), f.at("mu"));
        out["sigma"] = as_double(f.require("sigma"), f.at("sigma"));
        check_positive(out["sigma"].get<double>(), f.at("sigma"));
    } else {
        fail(f.at("kind"), "unknown prior kind '" + kind + "' (expected normal, uniform, lognormal)");
    }
    f.finish();
    return out;
}

CoordinatePrior prior_from_json(const json& j) {
    const std::string kind = j["kind"].get<std::string>();
    if (kind == "normal") return CoordinatePrior::normal(j["mean"].get<double>(), j["sd"].get<double>());
    if (kind == "uniform") return CoordinatePrior::uniform(j["lo"].get<double>(), j["hi"].get<double>());
    return CoordinatePrior::lognormal(j["mu"].get<double>(), j["sigma"].get<double>());
}

json canonical_prior(const std::string& model, const json& j) {
    const std::string path = "prior";
    as_array(j, path);
    json out = json::array();
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(canonical_prior_entry(j[i], indexed(path, i)));
    if (model == "gaussian_location") {
        if (out.size() != 1 || out[0]["kind"] != "normal")
            fail(path, "gaussian_location takes exactly one normal prior entry");
    } else if (model == "gpd") {
        if (out.size() != 2) fail(path, "gpd takes two entries (sigma, xi)");
        if (out[0]["kind"] == "normal" || (out[0]["kind"] == "uniform" && out[0]["lo"].get<double>() <= 0))
            fail(indexed(path, 0), "sigma prior must have positive support");
    } else {
        fail(path, "prior override not supported for model '" + model + "'");
    }
    return out;
}

// --- targets, basis, experiment --------------------------------------------

json default_targets(const std::string& model, const json& params, std::size_t p) {
    json out = json::array();
    if (model == "gpd") {
        for (const auto& tau : params["tau_grid"]) out.push_back({{"kind", "gpd_quantile"}, {"tau", tau}});
    } else {
        for (std::size_t i = 0; i < p; ++i) out.push_back({{"kind", "coordinate"}, {"index", i}});
    }
    return out;
}

json canonical_targets(const json& j, const std::string& model, std::size_t p) {
    const std::string path = "targets";
    as_array(j, path);
    if (j.empty()) fail(path, "must be nonempty");
    json out = json::array();
    for (std::size_t i = 0; i < j.size(); ++i) {
        Fields f(j[i], indexed(path, i));
        const std::string kind = as_string(f.require("kind"), f.at("kind"));
        if (kind == "coordinate") {
            const std::size_t index = as_size(f.require("index"), f.at("index"));
            if (index >= p) fail(f.at("index"), "coordinate out of range for a " + std::to_string(p) + "-d parameter");
            out.push_back({{"kind", kind}, {"index", index}});
        } else if (kind == "gpd_quantile") {
            if (model != "gpd") fail(f.at("kind"), "gpd_quantile targets need the gpd model");
            const double tau = as_double(f.require("tau"), f.at("tau"));
            if (!(tau > 0 && tau < 1)) fail(f.at("tau"), "must be in (0, 1)");
            out.push_back({{"kind", kind}, {"tau", tau}});
        } else {
            fail(f.at("kind"), "unknown target kind '" + kind + "' (expected coordinate, gpd_quantile)");
        }
        f.finish();
    }
    return out;
}

json canonical_basis(const json* j, std::size_t stat_dim) {
    const std::string path = "basis";
    json empty = json::object();
    Fields f(j ? *j : empty, path);
    const std::string kind = f.text("kind", "identity");
    json out;
    out["kind"] = kind;
    if (kind == "polynomial") {
        const std::size_t degree = f.count("degree", 2);
        if (degree < 1 || degree > 16) fail(f.at("degree"), "must be in [1, 16]");
        out["degree"] = degree;
    } else if (kind == "powers") {
        const json& ex = as_array(f.require("exponents"), f.at("exponents"));
        if (ex.empty()) fail(f.at("exponents"), "must be nonempty");
        json rows = json::array();
        for (std::size_t r = 0; r < ex.size(); ++r) {
            const std::string rp = indexed(f.at("exponents"), r);
            as_array(ex[r], rp);
            if (ex[r].size() != stat_dim)
                fail(rp, "needs one exponent per statistic (" + std::to_string(stat_dim) + ")");
            json row = json::array();
            for (std::size_t c = 0; c < ex[r].size(); ++c) row.push_back(as_size(ex[r][c], indexed(rp, c)));
            rows.push_back(row);
        }
        out["exponents"] = rows;
    } else if (kind != "identity") {
        fail(f.at("kind"), "unknown basis kind '" + kind + "' (expected identity, polynomial, powers)");
    }
    out["include_intercept"] = f.flag("include_intercept", true);
    f.finish();
    return out;
}

std::vector<std::string> canonical_transforms(const json& j, std::size_t p, const std::string& path) {
    std::vector<std::string> out;
    as_array(j, path);
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string t = as_string(j[i], indexed(path, i));
        if (t != "raw" && t != "log") fail(indexed(path, i), "expected raw or log");
        out.push_back(t);
    }
    if (!out.empty() && out.size() != p)
        fail(path, "needs one entry per parameter (" + std::to_string(p) + ") or none");
    return out;
}

json canonical_experiment(const json& j, std::size_t n_targets) {
    const std::string path = "experiment";
    Fields f(j, path);
    json out;
    json strategies = json::array();
    if (const json* s = f.get("strategies")) {
        as_array(*s, f.at("strategies"));
        for (std::size_t i = 0; i < s->size(); ++i) {
            const std::string name = as_string((*s)[i], indexed(f.at("strategies"), i));
            if (name != "joint" && name != "separate") fail(indexed(f.at("strategies"), i), "expected joint or separate");
            strategies.push_back(name);
        }
        if (strategies.empty()) fail(f.at("strategies"), "must be nonempty");
    } else {
        strategies.push_back("joint");
    }
    out["strategies"] = strategies;

    json groups = json::array();
    if (const json* g = f.get("groups")) {
        as_array(*g, f.at("groups"));
        for (std::size_t i = 0; i < g->size(); ++i) {
            const std::string gp = indexed(f.at("groups"), i);
            as_array((*g)[i], gp);
            json group = json::array();
            for (std::size_t k = 0; k < (*g)[i].size(); ++k) group.push_back(as_size((*g)[i][k], indexed(gp, k)));
            groups.push_back(group);
        }
    }
    out["groups"] = groups;

    json counts = json::array();
    if (const json* c = f.get("target_counts")) {
        as_array(*c, f.at("target_counts"));
        for (std::size_t i = 0; i < c->size(); ++i) counts.push_back(as_size((*c)[i], indexed(f.at("target_counts"), i)));
    }
    out["target_counts"] = counts;
    out["replicates"] = f.count("replicates", 20);
    out["tracked_target"] = f.count("tracked_target", 0);
    f.finish();

    ExperimentPlan plan;
    plan.strategies.clear();
    for (const auto& s : strategies) plan.strategies.push_back(s == "joint" ? Strategy::joint : Strategy::separate);
    plan.groups = groups.get<std::vector<std::vector<std::size_t>>>();
    plan.target_counts = counts.get<std::vector<std::size_t>>();
    plan.replicates = out["replicates"].get<std::size_t>();
    plan.tracked_target = out["tracked_target"].get<std::size_t>();
    try {
        plan.validate(n_targets);
    } catch (const ValidationError& e) {
        fail(path, e.what());
    }
    return out;
}

}  // namespace

RunConfig parse_config(const std::filesystem::path& path) { return parse_config_json(read_config_document(path)); }

json parse_model_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    if (name.empty()) fail("--model", "missing model name in '" + spec + "'");
    json params = json::object();
    if (colon != std::string::npos) {
        // Split on commas outside brackets so array values survive.
        std::vector<std::string> items(1);
        int depth = 0;
        for (char ch : spec.substr(colon + 1)) {
            if (ch == '[') ++depth;
            if (ch == ']') --depth;
            if (ch == ',' && depth == 0)
                items.emplace_back();
            else
                items.back() += ch;
        }
        for (const auto& item : items) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0) fail("--model", "expected key=value, got '" + item + "'");
            const std::string key = item.substr(0, eq), text = item.substr(eq + 1);
            if (params.contains(key)) fail("--model." + key, "given twice");
            json value = json::parse(text, nullptr, false);
            params[key] = value.is_discarded() ? json(text) : value;
        }
    }
    return {{"name", name}, {"params", params}};
}

json read_config_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return doc;
}

RunConfig parse_config_json(const json& doc) {
    RunConfig c;
    Fields top(doc, "");

    {
        Fields model(top.require("model"), "model");
        c.model_name = as_string(model.require("name"), "model.name");
        c.model_params = canonical_model_params(c.model_name, model.get("params"), "model.params");
        model.finish();
    }
    const ModelShape shape = model_shape(c.model_name, c.model_params);

    if (const json* prior = top.get("prior")) c.prior = canonical_prior(c.model_name, *prior);

    if (const json* j = top.get("pilot")) {
        Fields f(*j, "pilot");
        c.pilot_m = f.count("M", c.pilot_m);
        c.pilot_accept_fraction = f.number("accept_fraction", c.pilot_accept_fraction);
        c.pilot_statistics = f.text("statistics", c.pilot_statistics);
        c.pilot_expand = f.number("expand", c.pilot_expand);
        f.finish();
    }
    check_min_count(c.pilot_m, 10, "pilot.M");
    check_fraction(c.pilot_accept_fraction, "pilot.accept_fraction");
    if (c.pilot_statistics != "raw" && c.pilot_statistics != "projected")
        fail("pilot.statistics", "expected raw or projected");
    if (!(c.pilot_expand >= 0)) fail("pilot.expand", "must be nonnegative");

    if (const json* j = top.get("construct")) {
        Fields f(*j, "construct");
        c.construct_m = f.count("M", c.construct_m);
        f.finish();
    }
    check_min_count(c.construct_m, 10, "construct.M");

    if (const json* j = top.get("main")) {
        Fields f(*j, "main");
        c.main_m = f.count("M", c.main_m);
        c.main_accept_fraction = f.number("accept_fraction", c.main_accept_fraction);
        c.main_use_truncation = f.flag("use_truncation", c.main_use_truncation);
        c.main_kernel = f.text("kernel", c.main_kernel);
        c.main_persist_batch = f.flag("persist_batch", c.main_persist_batch);
        f.finish();
    }
    check_min_count(c.main_m, 10, "main.M");
    check_fraction(c.main_accept_fraction, "main.accept_fraction");
    if (c.main_kernel != "uniform" && c.main_kernel != "epanechnikov")
        fail("main.kernel", "expected uniform or epanechnikov");

    c.basis = canonical_basis(top.get("basis"), shape.stat_dim);

    if (const json* j = top.get("ridge_lambda")) c.ridge_lambda = as_double(*j, "ridge_lambda");
    if (!(c.ridge_lambda >= 0)) fail("ridge_lambda", "must be nonnegative");

    const json* targets = top.get("targets");
    c.targets = targets ? canonical_targets(*targets, c.model_name, shape.param_dim)
                        : default_targets(c.model_name, c.model_params, shape.param_dim);

    if (const json* j = top.get("adjust")) {
        Fields f(*j, "adjust");
        c.regression_adjust = f.flag("regression_adjust", false);
        c.marginal_adjust = f.flag("marginal_adjust", false);
        if (const json* t = f.get("transforms")) c.transforms = canonical_transforms(*t, shape.param_dim, f.at("transforms"));
        f.finish();
    }

    if (const json* j = top.get("experiment")) c.experiment = canonical_experiment(*j, c.targets.size());

    if (const json* j = top.get("seed")) c.seed = as_u64(*j, "seed");
    c.output_dir = top.text("output_dir", "");
    top.finish();

    return c;
}

json config_to_json(const RunConfig& c) {
    json out;
    out["model"] = {{"name", c.model_name}, {"params", c.model_params}};
    if (c.prior) out["prior"] = *c.prior;
    out["pilot"] = {{"M", c.pilot_m},
                    {"accept_fraction", c.pilot_accept_fraction},
                    {"statistics", c.pilot_statistics},
                    {"expand", c.pilot_expand}};
    out["construct"] = {{"M", c.construct_m}};
    out["main"] = {{"M", c.main_m},
                   {"accept_fraction", c.main_accept_fraction},
                   {"use_truncation", c.main_use_truncation},
                   {"kernel", c.main_kernel},
                   {"persist_batch", c.main_persist_batch}};
    out["basis"] = c.basis;
    out["ridge_lambda"] = c.ridge_lambda;
    out["targets"] = c.targets;
    out["adjust"] = {{"regression_adjust", c.regression_adjust},
                     {"marginal_adjust", c.marginal_adjust},
                     {"transforms", c.transforms}};
    if (c.experiment) out["experiment"] = *c.experiment;
    if (c.seed) out["seed"] = *c.seed;
    if (!c.output_dir.empty()) out["output_dir"] = c.output_dir;
    return out;
}

std::string config_hash(const RunConfig& config) {
    json j = config_to_json(config);
    j.erase("output_dir");
    return hex64(fnv1a64(j.dump()));
}

ModelFixture build_fixture(const RunConfig& c) {
    const json& p = c.model_params;
    if (c.model_name == "gaussian_location") {
        GaussianLocationParams g;
        g.mu0 = p["mu0"].get<double>();
        g.tau0 = p["tau0"].get<double>();
        g.sigma = p["sigma"].get<double>();
        g.n = p["n"].get<std::size_t>();
        g.xbar_obs = p["xbar_obs"].get<double>();
        g.n_noise_stats = p["n_noise_stats"].get<std::size_t>();
        if (c.prior) {
            g.mu0 = (*c.prior)[0]["mean"].get<double>();
            g.tau0 = (*c.prior)[0]["sd"].get<double>();
        }
        return gaussian_location_fixture(g);
    }
    if (c.model_name == "linear_gaussian") {
        LinearGaussianParams l;
        l.h = parse_matrix(p["h"], "model.params.h");
        l.noise_sd = p["noise_sd"].get<double>();
        l.prior_mean = parse_vector(p["prior_mean"], "model.params.prior_mean");
        l.prior_cov = parse_matrix(p["prior_cov"], "model.params.prior_cov");
        l.s_obs = parse_vector(p["s_obs"], "model.params.s_obs");
        l.n_noise_stats = p["n_noise_stats"].get<std::size_t>();
        return linear_gaussian_fixture(l);
    }
    if (c.model_name == "gpd") {
        GpdParams g;
        g.sigma_true = p["sigma_true"].get<double>();
        g.xi_true = p["xi_true"].get<double>();
        g.n_exceedances = p["n_exceedances"].get<std::size_t>();
        g.tau_grid = p["tau_grid"].get<std::vector<double>>();
        g.obs_seed = p["obs_seed"].get<std::uint64_t>();
        g.grid_points = p["grid_points"].get<std::size_t>();
        if (p.contains("observed_data")) g.observed = p["observed_data"].get<std::vector<double>>();
        if (c.prior) {
            g.sigma_prior = prior_from_json((*c.prior)[0]);
            g.xi_prior = prior_from_json((*c.prior)[1]);
        }
        return gpd_fixture(g);
    }
    if (c.model_name == "two_point") return two_point_fixture(p["flip_prob"].get<double>());
    throw ValidationError("model.name: unknown model '" + c.model_name + "'");
}

std::vector<TargetFunctional> parse_targets(const json& targets) {
    std::vector<TargetFunctional> out;
    for (const auto& t : targets) {
        if (t["kind"] == "coordinate")
            out.push_back(TargetFunctional::coordinate(t["index"].get<std::size_t>()));
        else
            out.push_back(TargetFunctional::gpd_quantile(t["tau"].get<double>()));
    }
    return out;
}

BasisSpec parse_basis(const json& basis) {
    BasisSpec spec;
    const std::string kind = basis["kind"].get<std::string>();
    if (kind == "polynomial")
        spec = BasisSpec::polynomial(basis["degree"].get<int>());
    else if (kind == "powers")
        spec = BasisSpec::powers(basis["exponents"].get<std::vector<std::vector<int>>>());
    else if (kind == "identity")
        spec = BasisSpec::identity();
    else
        throw ValidationError("basis.kind: cannot rebuild basis '" + kind + "'");
    spec.include_intercept = basis.value("include_intercept", true);
    return spec;
}

json basis_to_json(const BasisSpec& basis) {
    json out;
    out["kind"] = basis.kind_name();
    switch (basis.kind) {
        case BasisSpec::Kind::polynomial: out["degree"] = basis.degree; break;
        case BasisSpec::Kind::powers: out["exponents"] = basis.exponents; break;
        case BasisSpec::Kind::custom:
            out["name"] = basis.custom_name;
            out["dim"] = basis.custom_dim;
            break;
        case BasisSpec::Kind::identity: break;
    }
    out["include_intercept"] = basis.include_intercept;
    return out;
}

PipelineSettings pipeline_settings(const RunConfig& c) {
    PipelineSettings s;
    s.pilot_m = c.pilot_m;
    s.pilot_fraction = c.pilot_accept_fraction;
    s.pilot_statistics = c.pilot_statistics == "projected" ? PilotStatistics::projected : PilotStatistics::raw;
    s.pilot_expand = c.pilot_expand;
    s.construct_m = c.construct_m;
    s.main_m = c.main_m;
    s.main_fraction = c.main_accept_fraction;
    s.main_truncated = c.main_use_truncation;
    s.kernel = c.main_kernel == "epanechnikov" ? Acceptance::Kernel::epanechnikov : Acceptance::Kernel::uniform;
    s.basis = parse_basis(c.basis);
    s.ridge_lambda = c.ridge_lambda;
    s.targets = parse_targets(c.targets);
    s.regression_adjust = c.regression_adjust;
    for (const auto& t : c.transforms) s.transforms.push_back(t == "log" ? ParamTransform::log : ParamTransform::raw);
    if (!c.seed) throw ValidationError("seed: missing required key (set it in the config or pass --seed)");
    s.seed = *c.seed;
    s.validate();
    return s;
}

ExperimentPlan experiment_plan(const RunConfig& c) {
    if (!c.experiment) throw ValidationError("experiment: missing required key");
    const json& e = *c.experiment;
    ExperimentPlan plan;
    plan.strategies.clear();
    for (const auto& s : e["strategies"])
        plan.strategies.push_back(s == "joint" ? Strategy::joint : Strategy::separate);
    plan.groups = e["groups"].get<std::vector<std::vector<std::size_t>>>();
    plan.target_counts = e["target_counts"].get<std::vector<std::size_t>>();
    plan.replicates = e["replicates"].get<std::size_t>();
    plan.tracked_target = e["tracked_target"].get<std::size_t>();
    if (!c.seed) throw ValidationError("seed: missing required key (set it in the config or pass --seed)");
    plan.seed = *c.seed;
    plan.validate(c.targets.size());
    return plan;
}

}  // namespace sabc
