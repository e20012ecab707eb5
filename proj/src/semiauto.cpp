#include "sabc/semiauto.hpp"

#include "sabc/error.hpp"
#include "sabc/util.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace sabc {

namespace {

template <typename Fn>
auto in_stage(const char* stage, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (Error& e) {
        e.tag_stage(stage);
        throw;
    }
}

}  // namespace

std::string SummaryProjector::id() const {
    std::string text = basis.kind_name() + ":" + std::to_string(basis.degree) + ":" + std::to_string(input_dim);
    for (const auto& e : basis.exponents) {
        text += "(";
        for (int v : e) text += std::to_string(v) + ",";
        text += ")";
    }
    text += basis.custom_name;
    for (const auto& n : target_names) text += "|" + n;
    for (Eigen::Index i = 0; i < intercept.size(); ++i) text += ";" + format_double(intercept(i));
    for (Eigen::Index i = 0; i < coefficients.rows(); ++i) {
        for (Eigen::Index j = 0; j < coefficients.cols(); ++j) text += ";" + format_double(coefficients(i, j));
    }
    return hex64(fnv1a64(text));
}

SummaryProjector construct_projector(const SimulationBatch& batch, const std::vector<TargetFunctional>& targets,
                                     const BasisSpec& basis, double ridge_lambda, TruncationRegion region) {
    if (targets.empty()) throw ValidationError("construct_projector: no targets");
    const Matrix responses = evaluate_targets(batch.thetas, targets);
    const Matrix design = expand_design(batch.stats, basis);
    const LinearFit fit = fit_linear(design, responses, ridge_lambda, {}, basis.include_intercept);

    SummaryProjector projector;
    projector.basis = basis;
    projector.input_dim = batch.stat_dim();
    projector.intercept = fit.intercept;
    projector.coefficients = fit.coefficients;
    projector.target_names = target_names(targets);
    projector.condition_number = fit.condition_number;
    projector.vifs = fit.vifs;
    projector.residual_mss = fit.residual_mss;
    projector.region = std::move(region);
    if (projector.output_dim() != targets.size()) {
        throw NumericalError("construct_projector: projector dimension does not match target count");
    }
    return projector;
}

Vector project(const SummaryProjector& projector, const Vector& s) {
    if (static_cast<std::size_t>(s.size()) != projector.input_dim) {
        throw ValidationError("project: statistic has length " + std::to_string(s.size()) + ", projector expects " +
                              std::to_string(projector.input_dim));
    }
    return projector.intercept + projector.coefficients * expand_basis(s, projector.basis);
}

Matrix project_all(const SummaryProjector& projector, const Matrix& stats) {
    if (static_cast<std::size_t>(stats.cols()) != projector.input_dim) {
        throw ValidationError("project: statistics have " + std::to_string(stats.cols()) +
                              " columns, projector expects " + std::to_string(projector.input_dim));
    }
    const Matrix design = expand_design(stats, projector.basis);
    Matrix out = design * projector.coefficients.transpose();
    out.rowwise() += projector.intercept.transpose();
    return out;
}

void PipelineSettings::validate() const {
    auto fraction_ok = [](double f) { return f > 0.0 && f <= 1.0; };
    if (pilot_m < 10) throw ValidationError("pilot.M must be >= 10");
    if (construct_m < 10) throw ValidationError("construct.M must be >= 10");
    if (main_m < 10) throw ValidationError("main.M must be >= 10");
    if (!fraction_ok(pilot_fraction)) throw ValidationError("pilot.accept_fraction must be in (0,1]");
    if (!fraction_ok(main_fraction)) throw ValidationError("main.accept_fraction must be in (0,1]");
    if (!(pilot_expand >= 0.0)) throw ValidationError("pilot.expand must be >= 0");
    if (!(ridge_lambda >= 0.0)) throw ValidationError("ridge_lambda must be >= 0");
    if (targets.empty()) throw ValidationError("targets must be nonempty");
    basis.validate();
}

StageSeeds stage_seeds(std::uint64_t seed) {
    return {derive_seed(seed, 1, stream_domain::kStage), derive_seed(seed, 2, stream_domain::kStage),
            derive_seed(seed, 3, stream_domain::kStage)};
}

SimulationBatch stage_pilot_batch(const ModelFixture& fixture, const PipelineSettings& settings) {
    return in_stage("simulate", [&] {
        settings.validate();
        return simulate_batch(fixture.prior, fixture.simulator, settings.pilot_m, stage_seeds(settings.seed).pilot);
    });
}

PilotResult stage_pilot(const ModelFixture& fixture, const PipelineSettings& settings,
                        const SimulationBatch& pilot_batch) {
    return in_stage("pilot", [&] {
        PilotResult out;
        const Acceptance accept{Acceptance::Mode::fraction, settings.pilot_fraction, Acceptance::Kernel::uniform};
        if (settings.pilot_statistics == PilotStatistics::raw) {
            out.posterior = rejection_abc(pilot_batch, fixture.s_obs, accept);
        } else {
            const SummaryProjector pre = construct_projector(pilot_batch, settings.targets, settings.basis,
                                                             settings.ridge_lambda);
            const Matrix projected = project_all(pre, pilot_batch.stats);
            out.posterior = rejection_abc(pilot_batch.thetas, projected, project(pre, fixture.s_obs), accept);
            out.posterior.provenance.projector_id = pre.id();
        }
        out.posterior.provenance.seed = pilot_batch.seed;
        out.posterior.provenance.stage = "pilot";
        out.region = truncation_from_pilot(out.posterior, settings.pilot_expand);
        return out;
    });
}

ConstructResult stage_construct(const ModelFixture& fixture, const PipelineSettings& settings,
                                const TruncationRegion& region) {
    return in_stage("construct", [&] {
        ConstructResult out;
        const PriorSpec truncated = fixture.prior.with_truncation(region);
        out.batch = simulate_batch(truncated, fixture.simulator, settings.construct_m,
                                   stage_seeds(settings.seed).construct);
        out.projector = construct_projector(out.batch, settings.targets, settings.basis, settings.ridge_lambda, region);
        return out;
    });
}

InferResult stage_infer(const ModelFixture& fixture, const PipelineSettings& settings, const TruncationRegion& region,
                        const SummaryProjector& projector) {
    InferResult out;
    in_stage("infer", [&] {
        const PriorSpec prior = settings.main_truncated ? fixture.prior.with_truncation(region) : fixture.prior;
        out.main_batch = simulate_batch(prior, fixture.simulator, settings.main_m, stage_seeds(settings.seed).main);
        const Matrix projected = project_all(projector, out.main_batch.stats);
        out.projected_obs = project(projector, fixture.s_obs);
        const Vector scales = compute_scales(projected);
        const Acceptance accept{Acceptance::Mode::fraction, settings.main_fraction, settings.kernel};
        out.posterior = rejection_abc(out.main_batch.thetas, projected, out.projected_obs, accept, scales);
        out.posterior.provenance.seed = out.main_batch.seed;
        out.posterior.provenance.projector_id = projector.id();
        out.posterior.provenance.stage = "infer";
        out.accepted_projected = select_rows(projected, out.posterior.acceptance.indices);
        return 0;
    });
    if (settings.regression_adjust) {
        in_stage("regression_adjust", [&] {
            out.adjusted = regression_adjust(out.posterior, out.accepted_projected, out.projected_obs,
                                             settings.ridge_lambda, settings.transforms);
            return 0;
        });
    }
    out.estimates = estimate_targets(out.final_posterior(), settings.targets, &fixture);
    return out;
}

SemiautoResult run_semiauto(const ModelFixture& fixture, const PipelineSettings& settings) {
    SemiautoResult result;
    result.pilot_batch = stage_pilot_batch(fixture, settings);
    result.pilot = stage_pilot(fixture, settings, result.pilot_batch);
    result.construct = stage_construct(fixture, settings, result.pilot.region);
    result.infer = stage_infer(fixture, settings, result.pilot.region, result.construct.projector);
    return result;
}

std::vector<TargetEstimate> estimate_targets(const WeightedPosterior& posterior,
                                             const std::vector<TargetFunctional>& targets,
                                             const ModelFixture* fixture) {
    const Matrix values = evaluate_targets(posterior.thetas, targets);
    const auto n = static_cast<std::size_t>(values.rows());
    const double ess = 1.0 / posterior.weights.squaredNorm();
    std::vector<TargetEstimate> out;
    std::vector<double> terms(n);
    for (std::size_t j = 0; j < targets.size(); ++j) {
        const auto col = static_cast<Eigen::Index>(j);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            terms[i] = posterior.weights(ii) * values(ii, col);
        }
        const double mean = exact_sum(terms);
        for (std::size_t i = 0; i < n; ++i) {
            const auto ii = static_cast<Eigen::Index>(i);
            const double dv = values(ii, col) - mean;
            terms[i] = posterior.weights(ii) * dv * dv;
        }
        const double var = exact_sum(terms);
        TargetEstimate e;
        e.name = targets[j].name;
        e.estimate = mean;
        e.mc_sd = std::sqrt(var / ess);
        if (fixture) e.oracle = fixture->oracle_mean(targets[j]);
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace sabc
