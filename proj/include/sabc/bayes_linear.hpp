#pragma once

#include "sabc/abc_types.hpp"
#include "sabc/mat_core.hpp"

#include <cstddef>

namespace sabc {

/// Optimal affine estimator θ ≈ a + B·s under squared-error loss, together with
/// the first and second moments it was computed from.
///
/// Expectations are taken with respect to whatever distribution generated the
/// fitting batch. A batch drawn under a truncated prior therefore yields the
/// estimator for the truncated prior; nothing here needs to know about it.
struct BayesLinearModel {
    Vector intercept;        ///< a = E(θ) − B·E(s)
    Matrix coefficients;     ///< B = Cov(θ,s)·Var(s)⁻¹, p×d
    Vector mean_theta;       ///< E(θ)
    Vector mean_stats;       ///< E(s)
    Matrix var_theta;        ///< Var(θ), p×p
    Matrix var_stats;        ///< Var(s), d×d
    Matrix cov_theta_stats;  ///< Cov(θ,s), p×d
    std::size_t n_fit = 0;   ///< draws used; 0 for analytically supplied moments

    std::size_t param_dim() const { return static_cast<std::size_t>(mean_theta.size()); }
    std::size_t stat_dim() const { return static_cast<std::size_t>(mean_stats.size()); }
};

/// Fits from empirical moments of the batch. Requires M ≥ d+2.
BayesLinearModel fit_bayes_linear(const SimulationBatch& batch);
BayesLinearModel fit_bayes_linear(const Matrix& thetas, const Matrix& stats);

/// Builds the model from known moments (n_fit = 0).
BayesLinearModel bayes_linear_from_moments(Vector mean_theta, Matrix var_theta, Vector mean_stats,
                                           Matrix var_stats, Matrix cov_theta_stats);

/// E(θ) + Cov(θ,s)·Var(s)⁻¹·(s − E(s)) from the stored moments.
Vector adjusted_expectation(const BayesLinearModel& model, const Vector& s);

/// Monte Carlo criterion (1/M)·Σ‖θ⁽ᵐ⁾ − a − B·s⁽ᵐ⁾‖².
double criterion_value(const Vector& a, const Matrix& b, const SimulationBatch& batch);
double criterion_value(const Vector& a, const Matrix& b, const Matrix& thetas, const Matrix& stats);

struct AdjustedVariance {
    Matrix value;                     ///< symmetrized Var(θ) − Cov·Var(s)⁻¹·Cov'
    double min_eigenvalue = 0.0;
    bool moment_inconsistent = false; ///< an eigenvalue fell below −1e-8
};

AdjustedVariance adjusted_variance(const BayesLinearModel& model);

}  // namespace sabc
