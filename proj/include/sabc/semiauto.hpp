#pragma once

#include "sabc/abc_engine.hpp"
#include "sabc/models.hpp"
#include "sabc/regression.hpp"
#include "sabc/targets.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sabc {

/// Affine map s ↦ intercept + coefficients·F(s), one output per target.
struct SummaryProjector {
    BasisSpec basis;
    std::size_t input_dim = 0;
    Vector intercept;                   ///< p′
    Matrix coefficients;                ///< p′×q
    std::vector<std::string> target_names;
    double condition_number = 1.0;      ///< of the expanded construction design
    Vector vifs;
    Vector residual_mss;
    TruncationRegion region;            ///< region the construction batch was drawn under

    std::size_t output_dim() const { return static_cast<std::size_t>(intercept.size()); }
    /// Content hash identifying this projector in provenance.
    std::string id() const;
};

/// Regresses the evaluated targets on F(stats) over a batch drawn from the
/// truncated region.
SummaryProjector construct_projector(const SimulationBatch& batch, const std::vector<TargetFunctional>& targets,
                                     const BasisSpec& basis, double ridge_lambda, TruncationRegion region = {});

Vector project(const SummaryProjector& projector, const Vector& s);

/// Row-wise project over an M×d statistic matrix.
Matrix project_all(const SummaryProjector& projector, const Matrix& stats);

enum class PilotStatistics { raw, projected };

struct PipelineSettings {
    std::size_t pilot_m = 10'000;
    double pilot_fraction = 0.05;
    PilotStatistics pilot_statistics = PilotStatistics::raw;
    double pilot_expand = 0.1;
    std::size_t construct_m = 10'000;
    std::size_t main_m = 100'000;
    double main_fraction = 0.01;
    bool main_truncated = true;         ///< draw the main batch under the pilot region
    Acceptance::Kernel kernel = Acceptance::Kernel::uniform;
    BasisSpec basis = BasisSpec::identity();
    double ridge_lambda = 0.0;
    std::vector<TargetFunctional> targets;
    bool regression_adjust = false;
    std::vector<ParamTransform> transforms;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Seeds of the individual stages, all derived from the run seed.
struct StageSeeds {
    std::uint64_t pilot;
    std::uint64_t construct;
    std::uint64_t main;
};

StageSeeds stage_seeds(std::uint64_t seed);

struct TargetEstimate {
    std::string name;
    double estimate = 0.0;
    double mc_sd = 0.0;  ///< posterior sd / sqrt(effective sample size)
    std::optional<double> oracle;
};

struct PilotResult {
    WeightedPosterior posterior;
    TruncationRegion region;
};

struct ConstructResult {
    SimulationBatch batch;
    SummaryProjector projector;
};

struct InferResult {
    SimulationBatch main_batch;
    WeightedPosterior posterior;                 ///< rejection output
    std::optional<WeightedPosterior> adjusted;   ///< regression-adjusted, when enabled
    Matrix accepted_projected;                   ///< projected summaries of accepted draws
    Vector projected_obs;
    std::vector<TargetEstimate> estimates;

    const WeightedPosterior& final_posterior() const { return adjusted ? *adjusted : posterior; }
};

struct SemiautoResult {
    SimulationBatch pilot_batch;
    PilotResult pilot;
    ConstructResult construct;
    InferResult infer;
};

/// Stages of the pipeline, exposed so the CLI can run them one at a time and
/// still match run_semiauto bit for bit.
SimulationBatch stage_pilot_batch(const ModelFixture& fixture, const PipelineSettings& settings);
PilotResult stage_pilot(const ModelFixture& fixture, const PipelineSettings& settings, const SimulationBatch& pilot_batch);
ConstructResult stage_construct(const ModelFixture& fixture, const PipelineSettings& settings,
                                const TruncationRegion& region);
InferResult stage_infer(const ModelFixture& fixture, const PipelineSettings& settings, const TruncationRegion& region,
                        const SummaryProjector& projector);

/// pilot rejection on raw s → truncation box → fresh truncated batch →
/// projector → main batch → rejection on projected summaries (rescaled) →
/// optional regression adjustment. Errors carry the failing stage's name.
SemiautoResult run_semiauto(const ModelFixture& fixture, const PipelineSettings& settings);

/// Weighted posterior mean of each target plus its Monte Carlo sd.
std::vector<TargetEstimate> estimate_targets(const WeightedPosterior& posterior,
                                             const std::vector<TargetFunctional>& targets,
                                             const ModelFixture* fixture = nullptr);

}  // namespace sabc
