#pragma once

#include "sabc/mat_core.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sabc {

/// Type-7 (linear interpolation) sample quantile of ascending-sorted data.
double type7_quantile(std::span<const double> sorted, double p);

/// Type-7 quantiles at p = k/(count−1), k = 0..count−1. Positions are computed
/// in integer arithmetic, so when count equals the sample size the result is
/// exactly the sorted sample.
std::vector<double> evenly_spaced_quantiles(std::span<const double> sorted, std::size_t count);

/// 0-based ranks; ties broken by original position (stable).
std::vector<std::size_t> stable_ranks(std::span<const double> values);

using RankMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Column-wise stable ranks of an N×p sample.
RankMatrix rank_matrix(const Matrix& samples);

/// Spearman correlation matrix computed from stable ranks.
Matrix spearman_matrix(const Matrix& samples);

/// sup |F_n(x) − F(x)| for an exact CDF.
double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf);

}  // namespace sabc
