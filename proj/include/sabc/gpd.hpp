#pragma once

namespace sabc::gpd {

/// |ξ| below this uses the exponential-limit branch.
inline constexpr double kSmallShape = 1e-6;

/// Inverse CDF of the generalized Pareto distribution, (σ/ξ)((1−u)^(−ξ) − 1),
/// switching to the exponential limit for |ξ| < kSmallShape.
double quantile(double sigma, double xi, double u);

/// The closed form for ξ ≠ 0, evaluated as σ·expm1(−ξ·log1p(−u))/ξ.
double quantile_general(double sigma, double xi, double u);

/// Exponential-limit branch −σ·ln(1−u), carrying the first-order ξ term
/// σL(1 + ξL/2) with L = −ln(1−u) so both branches meet at the switch point.
double quantile_small_shape(double sigma, double xi, double u);

/// Log density; −inf outside the support.
double log_density(double x, double sigma, double xi);

}  // namespace sabc::gpd
