#pragma once

#include "sabc/abc_types.hpp"
#include "sabc/mat_core.hpp"
#include "sabc/rng.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sabc {

/// One independent prior coordinate.
struct CoordinatePrior {
    enum class Kind { uniform, normal, lognormal, discrete };

    Kind kind = Kind::uniform;
    double a = 0.0;  ///< uniform: lo | normal: mean | lognormal: mu
    double b = 1.0;  ///< uniform: hi | normal: sd   | lognormal: sigma
    std::vector<double> values;  ///< discrete support
    std::vector<double> probs;   ///< discrete probabilities (sum 1)

    static CoordinatePrior uniform(double lo, double hi);
    static CoordinatePrior normal(double mean, double sd);
    static CoordinatePrior lognormal(double mu, double sigma);
    static CoordinatePrior discrete(std::vector<double> values, std::vector<double> probs);

    void validate() const;
    double draw(DrawStream& rng) const;
    double quantile(double p) const;
    double mean() const;
    /// Continuous kinds only.
    double log_density(double x) const;
    std::string describe() const;
};

/// Correlated Gaussian prior over all coordinates at once.
struct JointNormalPrior {
    Vector mean;
    Matrix cov;
    Matrix lower;  ///< Cholesky factor of cov, filled by make()

    static JointNormalPrior make(Vector mean, Matrix cov);
};

/// p(θ): either independent coordinates or one joint normal, optionally
/// restricted to a truncation box (sampled by rejection).
struct PriorSpec {
    std::vector<CoordinatePrior> coordinates;
    std::optional<JointNormalPrior> joint_normal;
    std::optional<TruncationRegion> truncation;

    std::size_t dim() const;
    void validate() const;
    /// One draw ignoring the truncation box.
    Vector draw_untruncated(DrawStream& rng) const;
    Vector mean() const;  ///< untruncated prior mean
    /// Canonical text description; hashed into batch provenance.
    std::string describe() const;
    std::string hash() const;

    PriorSpec with_truncation(TruncationRegion region) const;
};

/// p(s|θ): a deterministic map of (θ, draw stream) to statistics.
struct SimulatorContract {
    std::string name;
    std::size_t param_dim = 0;
    std::size_t stat_dim = 0;
    std::function<Vector(const Vector& theta, DrawStream& rng)> simulate;
};

/// Draws M pairs (θ⁽ᵐ⁾, s⁽ᵐ⁾); draw m uses only DrawStream(seed, m). Truncated
/// priors are sampled by rejection against the box; a probe of 10⁴ proposals
/// with acceptance below 1e-4 raises "truncation region too small for prior".
SimulationBatch simulate_batch(const PriorSpec& prior, const SimulatorContract& sim, std::size_t m,
                               std::uint64_t seed);

/// sqrt(Σⱼ ((sⱼ − s_obs,ⱼ)/scaleⱼ)²).
double abc_distance(const Vector& s, const Vector& s_obs, const Vector& scales);

/// Per-column MAD×1.4826; falls back to the standard deviation, then 1.0 with a warning.
Vector compute_scales(const Matrix& stats);
Vector compute_scales(const SimulationBatch& batch);

struct Acceptance {
    enum class Mode { epsilon, fraction };
    enum class Kernel { uniform, epanechnikov };

    Mode mode = Mode::fraction;
    double value = 0.01;
    Kernel kernel = Kernel::uniform;

    static Acceptance epsilon(double eps) { return {Mode::epsilon, eps, Kernel::uniform}; }
    static Acceptance fraction(double f) { return {Mode::fraction, f, Kernel::uniform}; }
};

/// Rejection ABC. Fraction mode keeps the ⌈f·M⌉ smallest distances (ties by
/// draw index); epsilon mode keeps distance ≤ ε. Accepted rows are returned in
/// ascending draw-index order. Scales default to compute_scales(stats).
WeightedPosterior rejection_abc(const Matrix& thetas, const Matrix& stats, const Vector& s_obs,
                                const Acceptance& accept, const std::optional<Vector>& scales = std::nullopt);
WeightedPosterior rejection_abc(const SimulationBatch& batch, const Vector& s_obs, const Acceptance& accept,
                                const std::optional<Vector>& scales = std::nullopt);

/// Expanded bounding box of the accepted thetas.
TruncationRegion truncation_from_pilot(const WeightedPosterior& accepted, double expand);

/// Per-coordinate parameter transform applied around regression adjustment.
enum class ParamTransform { raw, log };

/// Linear regression adjustment θ − β̂·(s − s_obs), with β̂ from a weighted
/// (ridge-optional) fit of θ on s over the accepted draws. The fit's condition
/// number and VIFs are attached to the returned provenance.
WeightedPosterior regression_adjust(const WeightedPosterior& posterior, const Matrix& stats_of_accepted,
                                    const Vector& s_obs, double ridge_lambda,
                                    std::span<const ParamTransform> transforms = {});

/// Rows of `m` at the given indices.
Matrix select_rows(const Matrix& m, std::span<const std::size_t> indices);

}  // namespace sabc
