#include "sabc/mat_core.hpp"

#include "sabc/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace sabc {

void ExactSum::add(double x) {
    std::size_t kept = 0;
    for (double y : partials_) {
        if (std::abs(x) < std::abs(y)) std::swap(x, y);
        const double hi = x + y;
        const double lo = y - (hi - x);
        if (lo != 0.0) partials_[kept++] = lo;
        x = hi;
    }
    partials_.resize(kept);
    partials_.push_back(x);
}

double ExactSum::value() const {
    std::size_t n = partials_.size();
    if (n == 0) return 0.0;
    double hi = partials_[--n];
    double lo = 0.0;
    while (n > 0) {
        const double x = hi;
        const double y = partials_[--n];
        hi = x + y;
        const double yr = hi - x;
        lo = y - yr;
        if (lo != 0.0) break;
    }
    // Round-half-even correction when the remaining partials push the
    // discarded tail past the halfway point.
    if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) || (lo > 0.0 && partials_[n - 1] > 0.0))) {
        const double y = lo * 2.0;
        const double x = hi + y;
        const double yr = x - hi;
        if (y == yr) hi = x;
    }
    return hi;
}

double exact_sum(std::span<const double> values) {
    ExactSum acc;
    for (double v : values) acc.add(v);
    return acc.value();
}

Vector sample_mean(const Matrix& samples) {
    if (samples.rows() == 0) throw ValidationError("no samples");
    const auto m = static_cast<double>(samples.rows());
    Vector mean(samples.cols());
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
        mean(j) = exact_sum({samples.col(j).data(), static_cast<std::size_t>(samples.rows())}) / m;
    }
    return mean;
}

Matrix sample_cov(const Matrix& x, const Matrix& y) {
    if (x.rows() != y.rows()) {
        throw ValidationError("sample_cov: mismatched sample counts (" + std::to_string(x.rows()) +
                              " vs " + std::to_string(y.rows()) + ")");
    }
    if (x.rows() < 2) throw ValidationError("covariance needs >=2 samples");

    const Matrix xc = x.rowwise() - sample_mean(x).transpose();
    const Matrix yc = y.rowwise() - sample_mean(y).transpose();
    const auto denom = static_cast<double>(x.rows() - 1);

    Matrix cov(x.cols(), y.cols());
    std::vector<double> products(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            for (Eigen::Index m = 0; m < x.rows(); ++m) {
                products[static_cast<std::size_t>(m)] = xc(m, i) * yc(m, j);
            }
            cov(i, j) = exact_sum(products) / denom;
        }
    }
    return cov;
}

double symmetric_condition(const Matrix& a) {
    if (a.rows() == 0) return 1.0;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
    const Vector ev = eig.eigenvalues().cwiseAbs();
    const double lo = ev.minCoeff();
    const double hi = ev.maxCoeff();
    if (lo == 0.0) return std::numeric_limits<double>::infinity();
    return hi / lo;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

SpdSolution solve_spd_detailed(const Matrix& a, const Matrix& b) {
    if (a.rows() != a.cols()) throw ValidationError("solve_spd: matrix is not square");
    if (a.rows() != b.rows()) throw ValidationError("solve_spd: right-hand side has wrong row count");
    if (!a.allFinite() || !b.allFinite()) throw ValidationError("solve_spd: non-finite input");

    static constexpr std::array<double, 5> kLadder{0.0, 1e-12, 1e-10, 1e-8, 1e-6};

    double scale = a.rows() > 0 ? a.diagonal().mean() : 1.0;
    if (!(scale > 0.0)) scale = 1.0;
    const double tolerance = 1e-8 * max_abs(b);

    for (double lambda : kLadder) {
        Matrix jittered = a;
        jittered.diagonal().array() += lambda * scale;
        Eigen::LLT<Matrix> llt(jittered);
        if (llt.info() != Eigen::Success) continue;
        Matrix x = llt.solve(b);
        if (!x.allFinite()) continue;
        if (max_abs(a * x - b) <= tolerance) return {std::move(x), lambda};
    }
    const double cond = symmetric_condition(a);
    throw NumericalError("singular statistic covariance (condition estimate " + std::to_string(cond) + ")",
                         cond);
}

Matrix solve_spd(const Matrix& a, const Matrix& b) { return solve_spd_detailed(a, b).solution; }

}  // namespace sabc
