#include "sabc/marginal_adjust.hpp"

#include "sabc/empirical.hpp"
#include "sabc/error.hpp"
#include "sabc/rng.hpp"

#include <algorithm>
#include <set>

namespace sabc {

MarginalEstimate estimate_marginal(std::size_t coordinate, const ModelFixture& fixture,
                                   const PipelineSettings& settings) {
    if (coordinate >= fixture.simulator.param_dim) {
        throw ValidationError("estimate_marginal: coordinate " + std::to_string(coordinate) + " out of range");
    }
    PipelineSettings s = settings;
    s.targets = {TargetFunctional::coordinate(coordinate)};
    s.seed = derive_seed(settings.seed, coordinate, stream_domain::kMarginal);

    const SemiautoResult res = run_semiauto(fixture, s);
    WeightedPosterior post = res.infer.final_posterior();
    if (!post.has_uniform_weights()) post = systematic_resample(post, s.seed);

    MarginalEstimate out;
    out.coordinate = coordinate;
    out.samples = post.thetas.col(static_cast<Eigen::Index>(coordinate));
    out.provenance = post.provenance;
    out.provenance.notes.push_back("marginal of theta_" + std::to_string(coordinate + 1) +
                                   " from a 1-d constructed summary");
    out.epsilon = post.acceptance.epsilon;
    return out;
}

WeightedPosterior marginal_remap(const WeightedPosterior& joint, const std::vector<MarginalEstimate>& marginals) {
    joint.validate();
    if (!joint.has_uniform_weights()) throw ValidationError("resample joint first");
    const auto n = joint.size();
    const auto p = joint.param_dim();

    std::set<std::size_t> covered;
    for (const auto& m : marginals) {
        if (m.coordinate >= p) throw ValidationError("marginal_remap: coordinate " + std::to_string(m.coordinate) + " out of range");
        if (!covered.insert(m.coordinate).second) {
            throw ValidationError("marginal_remap: coordinate " + std::to_string(m.coordinate) + " given twice");
        }
        const auto ni = static_cast<std::size_t>(m.samples.size());
        if (ni < 2) throw ValidationError("marginal_remap: marginal sample needs at least 2 draws");
        if (ni < n) {
            throw ValidationError("marginal_remap: marginal for coordinate " + std::to_string(m.coordinate) + " has " +
                                  std::to_string(ni) + " draws, joint has " + std::to_string(n));
        }
        if (!m.samples.allFinite()) throw ValidationError("marginal_remap: non-finite marginal sample");
    }

    WeightedPosterior out = joint;
    for (const auto& m : marginals) {
        const auto col = static_cast<Eigen::Index>(m.coordinate);
        std::vector<double> sorted(m.samples.data(), m.samples.data() + m.samples.size());
        std::sort(sorted.begin(), sorted.end());
        const std::vector<double> targets = evenly_spaced_quantiles(sorted, n);

        std::vector<double> column(joint.thetas.col(col).data(), joint.thetas.col(col).data() + n);
        const auto ranks = stable_ranks(column);
        for (std::size_t i = 0; i < n; ++i) out.thetas(static_cast<Eigen::Index>(i), col) = targets[ranks[i]];
        out.provenance.notes.push_back("theta_" + std::to_string(m.coordinate + 1) + " margin replaced (" +
                                       (m.provenance.projector_id.empty() ? "marginal sample"
                                                                          : "projector " + m.provenance.projector_id) +
                                       ")");
    }
    out.provenance.stage = "marginal_adjust";
    return out;
}

WeightedPosterior systematic_resample(const WeightedPosterior& posterior, std::uint64_t seed) {
    posterior.validate();
    const auto n = posterior.size();
    DrawStream rng(seed, 0, stream_domain::kResample);
    const double u0 = rng.uniform();

    WeightedPosterior out;
    out.thetas.resize(posterior.thetas.rows(), posterior.thetas.cols());
    out.weights = Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n));
    out.acceptance = posterior.acceptance;
    out.acceptance.indices.clear();
    out.acceptance.distances.clear();
    out.provenance = posterior.provenance;
    out.provenance.notes.push_back("systematic resample");

    double cumulative = posterior.weights(0);
    std::size_t src = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double position = (u0 + static_cast<double>(k)) / static_cast<double>(n);
        while (position > cumulative && src + 1 < n) cumulative += posterior.weights(static_cast<Eigen::Index>(++src));
        out.thetas.row(static_cast<Eigen::Index>(k)) = posterior.thetas.row(static_cast<Eigen::Index>(src));
        if (!posterior.acceptance.indices.empty()) out.acceptance.indices.push_back(posterior.acceptance.indices[src]);
        if (!posterior.acceptance.distances.empty()) out.acceptance.distances.push_back(posterior.acceptance.distances[src]);
    }
    return out;
}

}  // namespace sabc
