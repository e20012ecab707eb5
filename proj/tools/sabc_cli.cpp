// sabc: stage-by-stage driver for the semi-automatic ABC pipeline.

#include "sabc/config.hpp"
#include "sabc/error.hpp"
#include "sabc/experiment.hpp"
#include "sabc/marginal_adjust.hpp"
#include "sabc/parallel.hpp"
#include "sabc/persist.hpp"
#include "sabc/rng.hpp"
#include "sabc/semiauto.hpp"
#include "sabc/util.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace sabc;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

struct Options {
    std::string config;
    std::string model;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::size_t threads = 0;
    bool full = false;
};

struct Run {
    RunConfig config;
    std::string hash;
    fs::path dir;
    ModelFixture fixture;
    PipelineSettings settings;

    ArtifactStamp stamp(const std::string& stage) const { return {hash, *config.seed, stage}; }

    /// Refuses artifacts produced by another config or seed.
    void check(const ArtifactStamp& s, const std::string& name) const {
        if (s.config_hash != hash)
            throw ValidationError("config-hash mismatch: " + (dir / (name + ".json")).string() +
                                  " was produced by config " + s.config_hash + ", current config is " + hash);
        if (s.seed != *config.seed)
            throw ValidationError("seed mismatch: " + (dir / (name + ".json")).string() + " was produced with seed " +
                                  std::to_string(s.seed));
    }
};

Run load_run(const Options& opt, bool need_settings = true) {
    if (opt.config.empty() && opt.model.empty()) throw ValidationError("--config or --model is required");
    Run run;
    nlohmann::json doc = opt.config.empty() ? nlohmann::json::object() : read_config_document(opt.config);
    if (!opt.model.empty()) {
        if (!doc.is_object()) throw ValidationError("config must be a JSON object");
        doc["model"] = parse_model_spec(opt.model);
    }
    run.config = parse_config_json(doc);
    if (opt.seed) run.config.seed = opt.seed;
    if (!run.config.seed) throw ValidationError("seed: missing required key (set it in the config or pass --seed)");
    run.hash = config_hash(run.config);
    run.dir = !opt.out.empty() ? fs::path(opt.out)
                               : (!run.config.output_dir.empty() ? fs::path(run.config.output_dir) : fs::path("sabc_run"));
    run.fixture = build_fixture(run.config);
    if (need_settings) run.settings = pipeline_settings(run.config);
    return run;
}

std::string cell(double v, int width = 12) {
    char buf[64];
    if (!std::isfinite(v))
        std::snprintf(buf, sizeof buf, "%*s", width, "-");
    else
        std::snprintf(buf, sizeof buf, "%*.6g", width, v);
    return buf;
}

// --- stages -----------------------------------------------------------------

void do_simulate(const Run& run) {
    const SimulationBatch batch = stage_pilot_batch(run.fixture, run.settings);
    write_batch(run.dir, "pilot_batch", batch, run.stamp("simulate"));
    write_observed(run.dir, "observed_data", run.fixture, run.stamp("simulate"));
    std::cout << "simulate: " << batch.size() << " draws -> " << (run.dir / "pilot_batch.csv").string() << "\n";
}

void do_pilot(const Run& run) {
    ArtifactStamp s;
    const SimulationBatch batch = read_batch(run.dir, "pilot_batch", &s);
    run.check(s, "pilot_batch");
    const PilotResult pilot = stage_pilot(run.fixture, run.settings, batch);
    write_posterior(run.dir, "pilot_posterior", pilot.posterior, run.stamp("pilot"));
    write_region(run.dir, "truncation", pilot.region, run.stamp("pilot"));
    std::cout << "pilot: accepted " << pilot.posterior.size() << " of " << batch.size() << ", epsilon "
              << format_double(pilot.posterior.acceptance.epsilon) << "\n";
}

void do_construct(const Run& run) {
    ArtifactStamp s;
    const TruncationRegion region = read_region(run.dir, "truncation", &s);
    run.check(s, "truncation");
    const ConstructResult c = stage_construct(run.fixture, run.settings, region);
    write_batch(run.dir, "construction_batch", c.batch, run.stamp("construct"));
    write_projector(run.dir, "projector", c.projector, run.stamp("construct"));
    std::cout << "construct: projector " << c.projector.id() << " with " << c.projector.output_dim()
              << " summaries, design condition " << format_double(c.projector.condition_number) << "\n";
}

void write_infer(const Run& run, const InferResult& res) {
    if (run.config.main_persist_batch) write_batch(run.dir, "main_batch", res.main_batch, run.stamp("infer"));
    write_posterior(run.dir, "posterior", res.posterior, run.stamp("infer"));
    if (res.adjusted) write_posterior(run.dir, "posterior_adjusted", *res.adjusted, run.stamp("regression_adjust"));
    write_estimates(run.dir, "estimates", res.estimates, run.stamp("infer"));
    std::cout << "infer: accepted " << res.posterior.size() << " of " << res.main_batch.size() << ", epsilon "
              << format_double(res.posterior.acceptance.epsilon) << (res.adjusted ? ", regression-adjusted" : "")
              << "\n";
}

void do_infer(const Run& run) {
    ArtifactStamp s;
    const TruncationRegion region = read_region(run.dir, "truncation", &s);
    run.check(s, "truncation");
    const SummaryProjector projector = read_projector(run.dir, "projector", &s);
    run.check(s, "projector");
    write_infer(run, stage_infer(run.fixture, run.settings, region, projector));
}

void do_marginal(const Run& run) {
    ArtifactStamp s;
    const std::string name = artifact_exists(run.dir, "posterior_adjusted") ? "posterior_adjusted" : "posterior";
    WeightedPosterior joint = read_posterior(run.dir, name, &s);
    run.check(s, name);
    if (!joint.has_uniform_weights())
        joint = systematic_resample(joint, derive_seed(*run.config.seed, 0, stream_domain::kResample));

    const std::size_t p = joint.param_dim();
    std::vector<MarginalEstimate> marginals;
    for (std::size_t i = 0; i < p; ++i) {
        try {
            marginals.push_back(estimate_marginal(i, run.fixture, run.settings));
        } catch (Error& e) {
            e.tag_stage("marginal");
            throw;
        }
        write_marginal(run.dir, "marginal_theta_" + std::to_string(i + 1), marginals.back(), run.stamp("marginal"));
    }
    const WeightedPosterior remapped = marginal_remap(joint, marginals);
    write_posterior(run.dir, "posterior_marginal", remapped, run.stamp("marginal_adjust"));
    std::vector<TargetFunctional> targets;
    for (std::size_t i = 0; i < p; ++i) targets.push_back(TargetFunctional::coordinate(i));
    write_estimates(run.dir, "estimates_marginal", estimate_targets(remapped, targets, &run.fixture),
                    run.stamp("marginal_adjust"));
    std::cout << "marginal: replaced " << p << " margins of " << remapped.size() << " draws\n";
}

void do_full(const Run& run) {
    do_simulate(run);
    do_pilot(run);
    do_construct(run);
    do_infer(run);
    if (run.config.marginal_adjust) do_marginal(run);
}

void print_estimates(const std::string& title, const std::vector<TargetEstimate>& estimates,
                     std::vector<std::vector<std::string>>& csv) {
    std::cout << title << "\n";
    std::printf("%-14s %12s %12s %12s %12s\n", "target", "estimate", "oracle", "abs_error", "mc_sd");
    for (const auto& e : estimates) {
        const double oracle = e.oracle ? *e.oracle : NAN;
        const double err = e.oracle ? std::abs(e.estimate - *e.oracle) : NAN;
        std::printf("%-14s %s %s %s %s\n", e.name.c_str(), cell(e.estimate).c_str(), cell(oracle).c_str(),
                    cell(err).c_str(), cell(e.mc_sd).c_str());
        csv.push_back({title, e.name, format_double(e.estimate), e.oracle ? format_double(oracle) : "",
                       e.oracle ? format_double(err) : "", format_double(e.mc_sd)});
    }
}

void print_experiment(const ExperimentReport& r) {
    std::cout << "error vs p' (tracked target " << r.tracked_target << ")\n";
    std::printf("%-8s %-9s %6s %12s %12s %14s %14s %8s\n", "p'", "strategy", "n", "mean_err", "median_err",
                "summary_cond", "design_cond", "failed");
    for (const auto& a : r.tracked)
        std::printf("%-8zu %-9s %6zu %s %s %s   %s %8zu\n", a.p_prime, strategy_name(a.strategy).c_str(), a.count,
                    cell(a.mean_error).c_str(), cell(a.median_error).c_str(), cell(a.median_summary_condition, 12).c_str(),
                    cell(a.median_design_condition, 12).c_str(), a.failures);
    std::cout << "all targets\n";
    std::printf("%-8s %-9s %6s %12s %12s %14s %14s %8s\n", "p'", "strategy", "n", "mean_err", "median_err",
                "summary_cond", "design_cond", "failed");
    for (const auto& a : r.per_p_prime)
        std::printf("%-8zu %-9s %6zu %s %s %s   %s %8zu\n", a.p_prime, strategy_name(a.strategy).c_str(), a.count,
                    cell(a.mean_error).c_str(), cell(a.median_error).c_str(), cell(a.median_summary_condition, 12).c_str(),
                    cell(a.median_design_condition, 12).c_str(), a.failures);
    if (!r.discrepancies.empty()) {
        std::cout << "joint vs separate\n";
        for (const auto& d : r.discrepancies)
            std::printf("%-8zu %-14s %6zu %s\n", d.p_prime, d.target.c_str(), d.count, cell(d.mean_abs_difference).c_str());
    }
    if (r.joint_error_nondecreasing)
        std::cout << "joint tracked error non-decreasing in p': " << (*r.joint_error_nondecreasing ? "yes" : "no") << "\n";
}

void do_experiment(const Run& run) {
    const ExperimentPlan plan = experiment_plan(run.config);
    const ExperimentReport report = run_experiment(plan, run.fixture, run.settings);
    write_experiment_report(run.dir, "experiment_report", report, run.stamp("experiment"));
    print_experiment(report);
}

void do_report(const Run& run) {
    // Every upstream artifact must come from this config and seed.
    for (const char* name : {"truncation", "projector", "posterior", "estimates"}) {
        run.check(read_stamp(run.dir, name), name);
    }
    for (const char* name : {"posterior_adjusted", "posterior_marginal", "estimates_marginal"}) {
        if (artifact_exists(run.dir, name)) run.check(read_stamp(run.dir, name), name);
    }

    std::vector<std::vector<std::string>> csv;
    print_estimates("posterior", read_estimates(run.dir, "estimates"), csv);
    if (artifact_exists(run.dir, "estimates_marginal")) {
        std::cout << "\n";
        print_estimates("marginal_adjusted", read_estimates(run.dir, "estimates_marginal"), csv);
    }
    std::string text = "table,target,estimate,oracle,abs_error,mc_sd\n";
    for (const auto& row : csv) {
        for (std::size_t i = 0; i < row.size(); ++i) text += (i ? "," : "") + row[i];
        text += "\n";
    }
    write_text(run.dir / "report.csv", text);
}

int run_cli(int argc, char** argv) {
    CLI::App app{"Semi-automatic ABC toolkit"};
    app.require_subcommand(1);
    app.fallthrough();
    Options opt;
    std::uint64_t seed = 0;
    app.add_option("--config", opt.config, "JSON run configuration");
    app.add_option("--model", opt.model, "Fixture as name[:key=value,...]; replaces the config's model");
    auto* seed_opt = app.add_option("--seed", seed, "Seed (overrides the config)");
    app.add_option("--out", opt.out, "Output directory");
    app.add_option("--threads", opt.threads, "Worker threads (0 = hardware)");

    auto* simulate = app.add_subcommand("simulate", "Draw the pilot batch");
    auto* pilot = app.add_subcommand("pilot", "Pilot rejection and truncation region");
    auto* construct = app.add_subcommand("construct", "Fit the summary projector");
    auto* infer = app.add_subcommand("infer", "Main ABC run on the constructed summaries");
    infer->add_flag("--full", opt.full, "Run every stage in one process");
    auto* marginal = app.add_subcommand("marginal", "Replace margins with 1-d estimates");
    auto* experiment = app.add_subcommand("experiment", "Joint vs separate study over p'");
    auto* report = app.add_subcommand("report", "Print estimates against oracles");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitValidation;
    }
    if (*seed_opt) opt.seed = seed;
    if (opt.threads) set_thread_count(opt.threads);

    const bool settings_needed = !report->parsed();
    const Run run = load_run(opt, settings_needed);
    if (simulate->parsed()) do_simulate(run);
    if (pilot->parsed()) do_pilot(run);
    if (construct->parsed()) do_construct(run);
    if (infer->parsed()) opt.full ? do_full(run) : do_infer(run);
    if (marginal->parsed()) do_marginal(run);
    if (experiment->parsed()) do_experiment(run);
    if (report->parsed()) do_report(run);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const sabc::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const sabc::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
