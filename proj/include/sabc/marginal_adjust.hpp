#pragma once

#include "sabc/abc_types.hpp"
#include "sabc/models.hpp"
#include "sabc/semiauto.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sabc {

/// Equally weighted draws approximating one marginal posterior p(θᵢ | s_obs).
struct MarginalEstimate {
    std::size_t coordinate = 0;
    Vector samples;
    Provenance provenance;
    double epsilon = 0.0;  ///< realized acceptance distance of the 1-d run
};

/// Runs the semi-automatic pipeline with the single target θᵢ, so the ABC
/// distance is computed on one constructed statistic. The seed is derived
/// from (settings.seed, i); targets in `settings` are replaced.
MarginalEstimate estimate_marginal(std::size_t coordinate, const ModelFixture& fixture,
                                   const PipelineSettings& settings);

/// Replaces margins of a uniformly weighted joint sample by rank matching.
///
/// For each covered coordinate the joint column is ranked (ties by row index),
/// and the value of rank r becomes the r-th of N evenly spaced type-7
/// quantiles of the marginal sample. Rows stay paired, so the per-row rank
/// vectors, and hence the Spearman matrix, are unchanged. Coordinates with no
/// entry in `marginals` are left untouched.
WeightedPosterior marginal_remap(const WeightedPosterior& joint, const std::vector<MarginalEstimate>& marginals);

/// Systematic resampling to N uniformly weighted draws, deterministic in seed.
WeightedPosterior systematic_resample(const WeightedPosterior& posterior, std::uint64_t seed);

}  // namespace sabc
