#pragma once

#include "sabc/abc_types.hpp"
#include "sabc/experiment.hpp"
#include "sabc/marginal_adjust.hpp"
#include "sabc/models.hpp"
#include "sabc/semiauto.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sabc {

/// Run identity embedded in every artifact.
struct ArtifactStamp {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string stage;

    friend bool operator==(const ArtifactStamp&, const ArtifactStamp&) = default;
};

namespace fs = std::filesystem;

// Tabular artifacts are <name>.csv plus a <name>.json sidecar; the rest are a
// single <name>.json. Numbers use the shortest round-trip decimal form, so
// loading and re-saving any artifact reproduces it byte for byte.

void write_batch(const fs::path& dir, const std::string& name, const SimulationBatch& batch, const ArtifactStamp& stamp);
SimulationBatch read_batch(const fs::path& dir, const std::string& name, ArtifactStamp* stamp = nullptr);

/// CSV columns: draw_index, theta_1..theta_p, weight. Weights are validated on load.
void write_posterior(const fs::path& dir, const std::string& name, const WeightedPosterior& posterior,
                     const ArtifactStamp& stamp);
WeightedPosterior read_posterior(const fs::path& dir, const std::string& name, ArtifactStamp* stamp = nullptr);

void write_region(const fs::path& dir, const std::string& name, const TruncationRegion& region,
                  const ArtifactStamp& stamp);
TruncationRegion read_region(const fs::path& dir, const std::string& name, ArtifactStamp* stamp = nullptr);

void write_projector(const fs::path& dir, const std::string& name, const SummaryProjector& projector,
                     const ArtifactStamp& stamp);
SummaryProjector read_projector(const fs::path& dir, const std::string& name, ArtifactStamp* stamp = nullptr);

void write_estimates(const fs::path& dir, const std::string& name, const std::vector<TargetEstimate>& estimates,
                     const ArtifactStamp& stamp);
std::vector<TargetEstimate> read_estimates(const fs::path& dir, const std::string& name,
                                           ArtifactStamp* stamp = nullptr);

/// Marginal samples as CSV (sample_index, value) plus sidecar.
void write_marginal(const fs::path& dir, const std::string& name, const MarginalEstimate& marginal,
                    const ArtifactStamp& stamp);
MarginalEstimate read_marginal(const fs::path& dir, const std::string& name, ArtifactStamp* stamp = nullptr);

/// The fixture's observed dataset as CSV (obs_index, x_1..x_k), s_obs in the sidecar.
void write_observed(const fs::path& dir, const std::string& name, const ModelFixture& fixture,
                    const ArtifactStamp& stamp);
/// Reads an observed-data CSV by path; no sidecar needed, so hand-made files work too.
Matrix read_observed_csv(const fs::path& path);

/// <name>.json (aggregates and rows) plus <name>.csv (rows).
void write_experiment_report(const fs::path& dir, const std::string& name, const ExperimentReport& report,
                             const ArtifactStamp& stamp);

/// Stamp of any artifact sidecar; errors name the missing file.
ArtifactStamp read_stamp(const fs::path& dir, const std::string& name);

/// Whether the sidecar <name>.json exists.
bool artifact_exists(const fs::path& dir, const std::string& name);

/// Writes text atomically enough for a single writer (temp file + rename).
void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

/// Canonical JSON text (2-space indent, sorted keys, trailing newline).
std::string canonical_json(const nlohmann::json& j);

}  // namespace sabc
