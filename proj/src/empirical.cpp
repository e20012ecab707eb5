#include "sabc/empirical.hpp"

#include "sabc/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sabc {

double type7_quantile(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw ValidationError("quantile of empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("quantile probability outside [0,1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::vector<double> evenly_spaced_quantiles(std::span<const double> sorted, std::size_t count) {
    if (sorted.empty()) throw ValidationError("quantiles of empty sample");
    std::vector<double> out(count);
    if (count == 0) return out;
    if (count == 1) {
        out[0] = type7_quantile(sorted, 0.5);
        return out;
    }
    const std::size_t n1 = sorted.size() - 1;
    const std::size_t c1 = count - 1;
    for (std::size_t k = 0; k < count; ++k) {
        // h = k·(n−1)/(count−1), split into integer part and remainder.
        const std::size_t num = k * n1;
        const std::size_t lo = num / c1;
        const std::size_t rem = num % c1;
        if (rem == 0 || lo + 1 >= sorted.size()) {
            out[k] = sorted[lo];
        } else {
            const double frac = static_cast<double>(rem) / static_cast<double>(c1);
            out[k] = sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
        }
    }
    return out;
}

std::vector<std::size_t> stable_ranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::size_t> ranks(values.size());
    for (std::size_t r = 0; r < order.size(); ++r) ranks[order[r]] = r;
    return ranks;
}

RankMatrix rank_matrix(const Matrix& samples) {
    RankMatrix out(samples.rows(), samples.cols());
    std::vector<double> column(static_cast<std::size_t>(samples.rows()));
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
        for (Eigen::Index i = 0; i < samples.rows(); ++i) column[static_cast<std::size_t>(i)] = samples(i, j);
        const auto ranks = stable_ranks(column);
        for (Eigen::Index i = 0; i < samples.rows(); ++i) {
            out(i, j) = static_cast<std::int64_t>(ranks[static_cast<std::size_t>(i)]);
        }
    }
    return out;
}

Matrix spearman_matrix(const Matrix& samples) {
    if (samples.rows() < 2) throw ValidationError("spearman_matrix: need at least 2 rows");
    const Matrix ranks = rank_matrix(samples).cast<double>();
    Matrix cov = sample_cov(ranks, ranks);
    const Vector sd = cov.diagonal().array().sqrt();
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        for (Eigen::Index j = 0; j < cov.cols(); ++j) cov(i, j) /= sd(i) * sd(j);
    }
    return cov;
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw ValidationError("ks_distance: empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        worst = std::max({worst, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return worst;
}

}  // namespace sabc
