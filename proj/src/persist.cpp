#include "sabc/persist.hpp"

#include "sabc/error.hpp"
#include "sabc/util.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace sabc {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json stamp_json(const ArtifactStamp& s, const std::string& kind) {
    return {{"kind", kind}, {"format_version", kFormatVersion}, {"config_hash", s.config_hash},
            {"seed", s.seed},  {"stage", s.stage}};
}

fs::path sidecar(const fs::path& dir, const std::string& name) { return dir / (name + ".json"); }
fs::path table(const fs::path& dir, const std::string& name) { return dir / (name + ".csv"); }

json load_json(const fs::path& path) {
    if (!fs::exists(path)) throw ValidationError("missing artifact " + path.string());
    try {
        return json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw ValidationError("malformed artifact " + path.string() + ": " + e.what());
    }
}

json load_sidecar(const fs::path& dir, const std::string& name, const std::string& kind, ArtifactStamp* stamp) {
    const fs::path path = sidecar(dir, name);
    json j = load_json(path);
    try {
        if (j.at("kind").get<std::string>() != kind)
            throw ValidationError(path.string() + " holds a " + j.at("kind").get<std::string>() + ", expected " + kind);
        if (j.at("format_version").get<int>() != kFormatVersion)
            throw ValidationError(path.string() + ": unsupported format version");
        if (stamp) {
            stamp->config_hash = j.at("config_hash").get<std::string>();
            stamp->seed = j.at("seed").get<std::uint64_t>();
            stamp->stage = j.at("stage").get<std::string>();
        }
    } catch (const json::exception& e) {
        throw ValidationError("malformed artifact " + path.string() + ": " + e.what());
    }
    return j;
}

// Non-finite values are stored as null.
json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double unnum(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

json vec_json(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(num(v(i)));
    return out;
}

Vector json_vec(const json& j) {
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = unnum(j[i]);
    return v;
}

json mat_json(const Matrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec_json(m.row(r).transpose()));
    return out;
}

Matrix json_mat(const json& j, std::size_t rows, std::size_t cols) {
    if (j.size() != rows) throw ValidationError("matrix row count mismatch");
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        if (j[r].size() != cols) throw ValidationError("matrix column count mismatch");
        for (std::size_t c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = unnum(j[r][c]);
    }
    return m;
}

json provenance_json(const Provenance& p) {
    json out;
    out["seed"] = p.seed;
    out["projector_id"] = p.projector_id;
    out["stage"] = p.stage;
    out["condition_number"] = p.condition_number ? num(*p.condition_number) : json(nullptr);
    json v = json::array();
    for (double x : p.vifs) v.push_back(num(x));
    out["vifs"] = v;
    out["notes"] = p.notes;
    return out;
}

Provenance json_provenance(const json& j) {
    Provenance p;
    p.seed = j.at("seed").get<std::uint64_t>();
    p.projector_id = j.at("projector_id").get<std::string>();
    p.stage = j.at("stage").get<std::string>();
    if (!j.at("condition_number").is_null()) p.condition_number = j.at("condition_number").get<double>();
    for (const auto& x : j.at("vifs")) p.vifs.push_back(unnum(x));
    p.notes = j.at("notes").get<std::vector<std::string>>();
    return p;
}

std::string csv_line(const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) line += ',';
        line += cells[i];
    }
    line += '\n';
    return line;
}

/// Parsed CSV: header plus rows of raw cells.
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

Csv load_csv(const fs::path& path, const std::vector<std::string>& expected_header) {
    if (!fs::exists(path)) throw ValidationError("missing artifact " + path.string());
    std::istringstream in(read_text(path));
    Csv csv;
    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path.string() + ": empty file");
    csv.header = split(line);
    if (csv.header != expected_header) throw ValidationError(path.string() + ": unexpected header");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        auto cells = split(line);
        if (cells.size() != expected_header.size())
            throw ValidationError(path.string() + ": line " + std::to_string(lineno) + " has " +
                                  std::to_string(cells.size()) + " fields, expected " +
                                  std::to_string(expected_header.size()));
        csv.rows.push_back(std::move(cells));
    }
    return csv;
}

std::uint64_t parse_index(const std::string& text, const fs::path& path) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size())
        throw ValidationError(path.string() + ": bad index '" + text + "'");
    return v;
}

std::vector<std::string> numbered(const std::string& prefix, std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i + 1));
    return out;
}

}  // namespace

std::string canonical_json(const json& j) { return j.dump(2) + "\n"; }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write " + path.string());
        out << text;
        if (!out) throw ValidationError("write failed for " + path.string());
    }
    fs::rename(tmp, path);
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("missing artifact " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool artifact_exists(const fs::path& dir, const std::string& name) { return fs::exists(sidecar(dir, name)); }

ArtifactStamp read_stamp(const fs::path& dir, const std::string& name) {
    const json j = load_json(sidecar(dir, name));
    ArtifactStamp s;
    try {
        s.config_hash = j.at("config_hash").get<std::string>();
        s.seed = j.at("seed").get<std::uint64_t>();
        s.stage = j.at("stage").get<std::string>();
    } catch (const json::exception& e) {
        throw ValidationError("malformed artifact " + sidecar(dir, name).string() + ": " + e.what());
    }
    return s;
}

// --- batch ------------------------------------------------------------------

void write_batch(const fs::path& dir, const std::string& name, const SimulationBatch& batch, const ArtifactStamp& stamp) {
    const std::size_t p = batch.param_dim(), d = batch.stat_dim();
    std::vector<std::string> header{"draw_index"};
    for (auto& h : numbered("theta_", p)) header.push_back(h);
    for (auto& h : numbered("s_", d)) header.push_back(h);
    std::string text = csv_line(header);
    std::vector<std::string> cells(1 + p + d);
    for (std::size_t m = 0; m < batch.size(); ++m) {
        cells[0] = std::to_string(m);
        for (std::size_t j = 0; j < p; ++j) cells[1 + j] = format_double(batch.thetas(m, j));
        for (std::size_t j = 0; j < d; ++j) cells[1 + p + j] = format_double(batch.stats(m, j));
        text += csv_line(cells);
    }
    write_text(table(dir, name), text);

    json meta = stamp_json(stamp, "simulation_batch");
    meta["rows"] = batch.size();
    meta["param_dim"] = p;
    meta["stat_dim"] = d;
    meta["batch_seed"] = batch.seed;
    meta["model"] = batch.model_name;
    meta["prior_hash"] = batch.prior_hash;
    write_text(sidecar(dir, name), canonical_json(meta));
}

SimulationBatch read_batch(const fs::path& dir, const std::string& name, ArtifactStamp* stamp) {
    const json meta = load_sidecar(dir, name, "simulation_batch", stamp);
    const std::size_t p = meta.at("param_dim"), d = meta.at("stat_dim"), rows = meta.at("rows");
    std::vector<std::string> header{"draw_index"};
    for (auto& h : numbered("theta_", p)) header.push_back(h);
    for (auto& h : numbered("s_", d)) header.push_back(h);
    const fs::path path = table(dir, name);
    const Csv csv = load_csv(path, header);
    if (csv.rows.size() != rows)
        throw ValidationError(path.string() + ": " + std::to_string(csv.rows.size()) + " rows, sidecar says " +
                              std::to_string(rows));
    SimulationBatch b;
    b.thetas.resize(rows, p);
    b.stats.resize(rows, d);
    for (std::size_t m = 0; m < rows; ++m) {
        if (parse_index(csv.rows[m][0], path) != m) throw ValidationError(path.string() + ": draw_index out of order");
        for (std::size_t j = 0; j < p; ++j) b.thetas(m, j) = parse_double(csv.rows[m][1 + j]);
        for (std::size_t j = 0; j < d; ++j) b.stats(m, j) = parse_double(csv.rows[m][1 + p + j]);
    }
    b.seed = meta.at("batch_seed").get<std::uint64_t>();
    b.model_name = meta.at("model").get<std::string>();
    b.prior_hash = meta.at("prior_hash").get<std::string>();
    return b;
}

// --- posterior --------------------------------------------------------------

void write_posterior(const fs::path& dir, const std::string& name, const WeightedPosterior& post,
                     const ArtifactStamp& stamp) {
    post.validate();
    const std::size_t p = post.param_dim(), n = post.size();
    const bool have_indices = post.acceptance.indices.size() == n;
    std::vector<std::string> header{"draw_index"};
    for (auto& h : numbered("theta_", p)) header.push_back(h);
    header.push_back("weight");
    std::string text = csv_line(header);
    std::vector<std::string> cells(p + 2);
    for (std::size_t i = 0; i < n; ++i) {
        cells[0] = std::to_string(have_indices ? post.acceptance.indices[i] : i);
        for (std::size_t j = 0; j < p; ++j) cells[1 + j] = format_double(post.thetas(i, j));
        cells[p + 1] = format_double(post.weights(i));
        text += csv_line(cells);
    }
    write_text(table(dir, name), text);

    json meta = stamp_json(stamp, "posterior");
    meta["rows"] = n;
    meta["param_dim"] = p;
    meta["realized_epsilon"] = num(post.acceptance.epsilon);
    meta["candidates"] = post.acceptance.candidates;
    meta["has_draw_index"] = have_indices;
    json dist = json::array();
    for (double x : post.acceptance.distances) dist.push_back(num(x));
    meta["distances"] = dist;
    meta["provenance"] = provenance_json(post.provenance);
    write_text(sidecar(dir, name), canonical_json(meta));
}

WeightedPosterior read_posterior(const fs::path& dir, const std::string& name, ArtifactStamp* stamp) {
    const json meta = load_sidecar(dir, name, "posterior", stamp);
    const std::size_t p = meta.at("param_dim"), rows = meta.at("rows");
    std::vector<std::string> header{"draw_index"};
    for (auto& h : numbered("theta_", p)) header.push_back(h);
    header.push_back("weight");
    const fs::path path = table(dir, name);
    const Csv csv = load_csv(path, header);
    if (csv.rows.size() != rows)
        throw ValidationError(path.string() + ": " + std::to_string(csv.rows.size()) + " rows, sidecar says " +
                              std::to_string(rows));
    WeightedPosterior post;
    post.thetas.resize(rows, p);
    post.weights.resize(rows);
    const bool have_indices = meta.at("has_draw_index").get<bool>();
    for (std::size_t i = 0; i < rows; ++i) {
        const auto idx = parse_index(csv.rows[i][0], path);
        if (have_indices) post.acceptance.indices.push_back(idx);
        for (std::size_t j = 0; j < p; ++j) post.thetas(i, j) = parse_double(csv.rows[i][1 + j]);
        post.weights(i) = parse_double(csv.rows[i][p + 1]);
    }
    post.acceptance.epsilon = unnum(meta.at("realized_epsilon"));
    post.acceptance.candidates = meta.at("candidates").get<std::size_t>();
    for (const auto& x : meta.at("distances")) post.acceptance.distances.push_back(unnum(x));
    post.provenance = json_provenance(meta.at("provenance"));
    try {
        post.validate();
    } catch (const Error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return post;
}

// --- truncation region ------------------------------------------------------

void write_region(const fs::path& dir, const std::string& name, const TruncationRegion& region,
                  const ArtifactStamp& stamp) {
    json meta = stamp_json(stamp, "truncation_region");
    json lo = json::array(), hi = json::array();
    for (double v : region.lo) lo.push_back(v);
    for (double v : region.hi) hi.push_back(v);
    meta["lo"] = lo;
    meta["hi"] = hi;
    write_text(sidecar(dir, name), canonical_json(meta));
}

TruncationRegion read_region(const fs::path& dir, const std::string& name, ArtifactStamp* stamp) {
    const json meta = load_sidecar(dir, name, "truncation_region", stamp);
    TruncationRegion r;
    r.lo = meta.at("lo").get<std::vector<double>>();
    r.hi = meta.at("hi").get<std::vector<double>>();
    r.validate();
    return r;
}

// --- projector --------------------------------------------------------------

void write_projector(const fs::path& dir, const std::string& name, const SummaryProjector& proj,
                     const ArtifactStamp& stamp) {
    if (proj.basis.kind == BasisSpec::Kind::custom)
        throw ValidationError("projector with custom basis '" + proj.basis.custom_name + "' cannot be persisted");
    json meta = stamp_json(stamp, "summary_projector");
    json basis;
    basis["kind"] = proj.basis.kind_name();
    basis["degree"] = proj.basis.degree;
    basis["exponents"] = proj.basis.exponents;
    basis["include_intercept"] = proj.basis.include_intercept;
    meta["basis"] = basis;
    meta["input_dim"] = proj.input_dim;
    meta["output_dim"] = proj.output_dim();
    meta["q"] = proj.coefficients.cols();
    meta["intercept"] = vec_json(proj.intercept);
    meta["coefficients"] = mat_json(proj.coefficients);
    meta["target_names"] = proj.target_names;
    meta["condition_number"] = num(proj.condition_number);
    meta["vifs"] = vec_json(proj.vifs);
    meta["residual_mss"] = vec_json(proj.residual_mss);
    meta["region"] = {{"lo", proj.region.lo}, {"hi", proj.region.hi}};
    meta["projector_id"] = proj.id();
    write_text(sidecar(dir, name), canonical_json(meta));
}

SummaryProjector read_projector(const fs::path& dir, const std::string& name, ArtifactStamp* stamp) {
    const json meta = load_sidecar(dir, name, "summary_projector", stamp);
    SummaryProjector proj;
    try {
        const json& b = meta.at("basis");
        const std::string kind = b.at("kind").get<std::string>();
        if (kind == "identity")
            proj.basis = BasisSpec::identity();
        else if (kind == "polynomial")
            proj.basis = BasisSpec::polynomial(b.at("degree").get<int>());
        else if (kind == "powers")
            proj.basis = BasisSpec::powers(b.at("exponents").get<std::vector<std::vector<int>>>());
        else
            throw ValidationError("unsupported basis kind '" + kind + "'");
        proj.basis.include_intercept = b.at("include_intercept").get<bool>();
        proj.input_dim = meta.at("input_dim").get<std::size_t>();
        const std::size_t out = meta.at("output_dim"), q = meta.at("q");
        proj.intercept = json_vec(meta.at("intercept"));
        proj.coefficients = json_mat(meta.at("coefficients"), out, q);
        proj.target_names = meta.at("target_names").get<std::vector<std::string>>();
        proj.condition_number = unnum(meta.at("condition_number"));
        proj.vifs = json_vec(meta.at("vifs"));
        proj.residual_mss = json_vec(meta.at("residual_mss"));
        proj.region.lo = meta.at("region").at("lo").get<std::vector<double>>();
        proj.region.hi = meta.at("region").at("hi").get<std::vector<double>>();
        if (static_cast<std::size_t>(proj.intercept.size()) != out || proj.target_names.size() != out)
            throw ValidationError("output dimension mismatch");
    } catch (const json::exception& e) {
        throw ValidationError("malformed projector " + sidecar(dir, name).string() + ": " + e.what());
    }
    if (proj.id() != meta.at("projector_id").get<std::string>())
        throw ValidationError(sidecar(dir, name).string() + ": projector id does not match its coefficients");
    return proj;
}

// --- estimates --------------------------------------------------------------

void write_estimates(const fs::path& dir, const std::string& name, const std::vector<TargetEstimate>& estimates,
                     const ArtifactStamp& stamp) {
    json meta = stamp_json(stamp, "estimates");
    json rows = json::array();
    for (const auto& e : estimates) {
        rows.push_back({{"target", e.name},
                        {"estimate", num(e.estimate)},
                        {"mc_sd", num(e.mc_sd)},
                        {"oracle", e.oracle ? num(*e.oracle) : json(nullptr)}});
    }
    meta["estimates"] = rows;
    write_text(sidecar(dir, name), canonical_json(meta));
}

std::vector<TargetEstimate> read_estimates(const fs::path& dir, const std::string& name, ArtifactStamp* stamp) {
    const json meta = load_sidecar(dir, name, "estimates", stamp);
    std::vector<TargetEstimate> out;
    for (const auto& r : meta.at("estimates")) {
        TargetEstimate e;
        e.name = r.at("target").get<std::string>();
        e.estimate = unnum(r.at("estimate"));
        e.mc_sd = unnum(r.at("mc_sd"));
        if (!r.at("oracle").is_null()) e.oracle = r.at("oracle").get<double>();
        out.push_back(e);
    }
    return out;
}

// --- marginal ---------------------------------------------------------------

void write_marginal(const fs::path& dir, const std::string& name, const MarginalEstimate& marginal,
                    const ArtifactStamp& stamp) {
    std::string text = csv_line({"sample_index", "value"});
    for (Eigen::Index i = 0; i < marginal.samples.size(); ++i)
        text += csv_line({std::to_string(i), format_double(marginal.samples(i))});
    write_text(table(dir, name), text);
    json meta = stamp_json(stamp, "marginal");
    meta["coordinate"] = marginal.coordinate;
    meta["rows"] = marginal.samples.size();
    meta["realized_epsilon"] = num(marginal.epsilon);
    meta["provenance"] = provenance_json(marginal.provenance);
    write_text(sidecar(dir, name), canonical_json(meta));
}

MarginalEstimate read_marginal(const fs::path& dir, const std::string& name, ArtifactStamp* stamp) {
    const json meta = load_sidecar(dir, name, "marginal", stamp);
    const fs::path path = table(dir, name);
    const Csv csv = load_csv(path, {"sample_index", "value"});
    const std::size_t rows = meta.at("rows");
    if (csv.rows.size() != rows) throw ValidationError(path.string() + ": row count does not match sidecar");
    MarginalEstimate m;
    m.coordinate = meta.at("coordinate").get<std::size_t>();
    m.samples.resize(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        if (parse_index(csv.rows[i][0], path) != i) throw ValidationError(path.string() + ": sample_index out of order");
        m.samples(static_cast<Eigen::Index>(i)) = parse_double(csv.rows[i][1]);
    }
    m.epsilon = unnum(meta.at("realized_epsilon"));
    m.provenance = json_provenance(meta.at("provenance"));
    return m;
}

// --- observed data ------------------------------------------------------------

void write_observed(const fs::path& dir, const std::string& name, const ModelFixture& fixture,
                    const ArtifactStamp& stamp) {
    const Matrix& x = fixture.observed_data;
    std::vector<std::string> header{"obs_index"};
    for (const auto& h : numbered("x_", static_cast<std::size_t>(x.cols()))) header.push_back(h);
    std::string text = csv_line(header);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        std::vector<std::string> cells{std::to_string(r)};
        for (Eigen::Index c = 0; c < x.cols(); ++c) cells.push_back(format_double(x(r, c)));
        text += csv_line(cells);
    }
    write_text(table(dir, name), text);
    json meta = stamp_json(stamp, "observed");
    meta["model"] = fixture.name;
    meta["rows"] = x.rows();
    meta["columns"] = x.cols();
    meta["s_obs"] = vec_json(fixture.s_obs);
    write_text(sidecar(dir, name), canonical_json(meta));
}

Matrix read_observed_csv(const fs::path& path) {
    if (!fs::exists(path)) throw ValidationError("missing observed data file " + path.string());
    std::string first;
    {
        std::istringstream in(read_text(path));
        std::getline(in, first);
    }
    const auto header = split(first);
    if (header.size() < 2 || header[0] != "obs_index") throw ValidationError(path.string() + ": unexpected header");
    const Csv csv = load_csv(path, header);
    if (csv.rows.empty()) throw ValidationError(path.string() + ": no observations");
    Matrix x(static_cast<Eigen::Index>(csv.rows.size()), static_cast<Eigen::Index>(header.size() - 1));
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        if (parse_index(csv.rows[r][0], path) != r) throw ValidationError(path.string() + ": obs_index out of order");
        for (std::size_t c = 1; c < header.size(); ++c) {
            const double v = parse_double(csv.rows[r][c]);
            if (!std::isfinite(v))
                throw ValidationError(path.string() + ": non-finite value on line " + std::to_string(r + 2));
            x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 1)) = v;
        }
    }
    return x;
}

// --- experiment report ------------------------------------------------------

namespace {

json aggregate_json(const ErrorAggregate& a) {
    return {{"p_prime", a.p_prime},
            {"strategy", strategy_name(a.strategy)},
            {"target", a.target},
            {"count", a.count},
            {"mean_error", num(a.mean_error)},
            {"median_error", num(a.median_error)},
            {"median_summary_condition", num(a.median_summary_condition)},
            {"median_design_condition", num(a.median_design_condition)},
            {"failures", a.failures}};
}

std::string opt_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void write_experiment_report(const fs::path& dir, const std::string& name, const ExperimentReport& report,
                             const ArtifactStamp& stamp) {
    json meta = stamp_json(stamp, "experiment_report");
    json per_target = json::array(), per_p = json::array(), tracked = json::array(), disc = json::array();
    for (const auto& a : report.per_target) per_target.push_back(aggregate_json(a));
    for (const auto& a : report.per_p_prime) per_p.push_back(aggregate_json(a));
    for (const auto& a : report.tracked) tracked.push_back(aggregate_json(a));
    for (const auto& d : report.discrepancies)
        disc.push_back({{"p_prime", d.p_prime},
                        {"target", d.target},
                        {"count", d.count},
                        {"mean_abs_difference", num(d.mean_abs_difference)}});
    meta["per_target"] = per_target;
    meta["per_p_prime"] = per_p;
    meta["tracked"] = tracked;
    meta["tracked_target"] = report.tracked_target;
    meta["discrepancies"] = disc;
    meta["joint_error_nondecreasing"] =
        report.joint_error_nondecreasing ? json(*report.joint_error_nondecreasing) : json(nullptr);
    meta["failures"] = report.failures;
    meta["rows"] = report.rows.size();
    write_text(sidecar(dir, name), canonical_json(meta));

    std::string text = csv_line({"p_prime", "strategy", "replicate", "seed", "group", "target", "target_index",
                                 "estimate", "oracle", "abs_error", "summary_dim", "accepted", "design_condition",
                                 "summary_condition", "failed", "error"});
    for (const auto& r : report.rows) {
        std::string err = r.error;
        for (char& ch : err)
            if (ch == ',' || ch == '\n') ch = ';';
        text += csv_line({std::to_string(r.p_prime), strategy_name(r.strategy), std::to_string(r.replicate),
                          std::to_string(r.seed), std::to_string(r.group), r.target, std::to_string(r.target_index),
                          format_double(r.estimate), opt_cell(r.oracle), opt_cell(r.abs_error),
                          std::to_string(r.summary_dim), std::to_string(r.accepted), format_double(r.design_condition),
                          format_double(r.summary_condition), r.failed ? "1" : "0", err});
    }
    write_text(table(dir, name), text);
}

}  // namespace sabc
