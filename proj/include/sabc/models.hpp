#pragma once

#include "sabc/abc_engine.hpp"
#include "sabc/mat_core.hpp"
#include "sabc/targets.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sabc {

/// Exact (closed-form or grid-integrated) posterior quantities of a fixture.
/// None of these touch the ABC machinery.
struct FixtureOracle {
    std::function<std::optional<double>(const TargetFunctional&)> posterior_mean;
    /// Exact marginal posterior CDF of one coordinate, where available.
    std::function<std::optional<double>(std::size_t coordinate, double x)> marginal_cdf;
};

struct ModelFixture {
    std::string name;
    std::string params;  ///< canonical parameter string
    SimulatorContract simulator;
    PriorSpec prior;
    Matrix observed_data;  ///< one row per observation
    Vector s_obs;
    std::vector<TargetFunctional> default_targets;
    FixtureOracle oracle;

    std::optional<double> oracle_mean(const TargetFunctional& target) const;
    std::optional<double> oracle_cdf(std::size_t coordinate, double x) const;
};

// --- Gaussian location ------------------------------------------------------

/// θ ~ N(μ₀, τ₀²); n observations N(θ, σ²). Statistics: sample mean, sample
/// sd, then n_noise_stats independent N(0,1) columns. The observed dataset is
/// x̄_obs + σ·z for a fixed standardized pattern z, so s_obs = (x̄_obs, σ, 0…).
struct GaussianLocationParams {
    double mu0 = 0.0;
    double tau0 = 1.0;
    double sigma = 1.0;
    std::size_t n = 4;
    double xbar_obs = 1.0;
    std::size_t n_noise_stats = 0;
};

ModelFixture gaussian_location_fixture(const GaussianLocationParams& params);

/// Conjugate posterior (mean, sd) of the location parameter.
std::pair<double, double> gaussian_location_posterior(const GaussianLocationParams& params);

// --- linear Gaussian --------------------------------------------------------

/// θ ~ N(μ, Σ); s = Hθ + ε with ε ~ N(0, noise_sd²·I), followed by
/// n_noise_stats pure-noise N(0,1) statistics (observed as 0).
struct LinearGaussianParams {
    Matrix h;             ///< d×p
    double noise_sd = 1.0;
    Vector prior_mean;    ///< p
    Matrix prior_cov;     ///< p×p
    Vector s_obs;         ///< d (informative statistics only)
    std::size_t n_noise_stats = 0;

    void validate() const;
};

struct GaussianPosterior {
    Vector mean;
    Matrix cov;
};

ModelFixture linear_gaussian_fixture(const LinearGaussianParams& params);

/// Exact posterior via the precision form (Σ⁻¹ + HᵀH/σ²)⁻¹.
GaussianPosterior linear_gaussian_posterior(const LinearGaussianParams& params);

/// Analytic joint moments of (θ, s) for the informative statistics.
struct JointMoments {
    Vector mean_theta;
    Matrix var_theta;
    Vector mean_stats;
    Matrix var_stats;
    Matrix cov_theta_stats;
};

JointMoments linear_gaussian_moments(const LinearGaussianParams& params);

// --- generalized Pareto -----------------------------------------------------

/// Empirical quantile levels of the GPD statistic ladder; mean and sd follow.
inline constexpr std::array<double, 11> kGpdLadder{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
inline constexpr std::size_t kGpdStatDim = kGpdLadder.size() + 2;

/// Ladder quantiles (type 7), mean and sd of an exceedance sample.
Vector gpd_statistics(std::span<const double> sample);

/// 2-d grid posterior over (σ, ξ). Nodes are uniform in log σ and ξ over the
/// prior's 0.1%–99.9% quantile box; the integrand includes the Jacobian σ of
/// the log-σ coordinate and is normalized with trapezoidal weights.
class GpdGridPosterior {
public:
    GpdGridPosterior(std::span<const double> exceedances, CoordinatePrior sigma_prior, CoordinatePrior xi_prior,
                     std::size_t grid_points);

    /// Posterior expectation of g(σ, ξ).
    double expectation(const std::function<double(double, double)>& g) const;

    std::size_t grid_points() const { return log_sigma_.size(); }

private:
    std::vector<double> log_sigma_;
    std::vector<double> xi_;
    Matrix weights_;  ///< normalized posterior mass per node
};

struct GpdParams {
    double sigma_true = 1.0;
    double xi_true = 0.2;
    std::size_t n_exceedances = 100;
    std::vector<double> tau_grid{0.5, 0.9, 0.99};
    std::uint64_t obs_seed = 20120601;
    std::size_t grid_points = 200;
    std::vector<double> observed;  ///< when nonempty, used instead of simulating the dataset
    CoordinatePrior sigma_prior = CoordinatePrior::lognormal(0.0, 1.0);
    CoordinatePrior xi_prior = CoordinatePrior::uniform(-0.4, 0.9);
};

ModelFixture gpd_fixture(const GpdParams& params);

// --- two-point toy ----------------------------------------------------------

/// θ ∈ {0, 1} with equal prior mass; s = θ, flipped with probability
/// flip_prob. Observed s = 1, so P(θ = 1 | s = 1) = 1 − flip_prob.
ModelFixture two_point_fixture(double flip_prob);

}  // namespace sabc
