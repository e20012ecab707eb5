#pragma once

#include "sabc/mat_core.hpp"

#include <random>

namespace testing {

inline sabc::Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> z;
    sabc::Matrix m(rows, cols);
    for (std::size_t c = 0; c < cols; ++c)
        for (std::size_t r = 0; r < rows; ++r) m(r, c) = z(gen);
    return m;
}

/// OLS in long double via normal equations on centered data; a check that
/// shares no code with the library's QR path.
struct NaiveOls {
    sabc::Vector intercept;
    sabc::Matrix coefficients;
};

inline NaiveOls naive_ols(const sabc::Matrix& x, const sabc::Matrix& y) {
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    const LMat xl = x.cast<long double>(), yl = y.cast<long double>();
    const LVec xm = xl.colwise().mean().transpose(), ym = yl.colwise().mean().transpose();
    const LMat xc = xl.rowwise() - xm.transpose(), yc = yl.rowwise() - ym.transpose();
    const LMat beta = (xc.transpose() * xc).ldlt().solve(xc.transpose() * yc).transpose();
    NaiveOls out;
    out.coefficients = beta.cast<double>();
    out.intercept = (ym - beta * xm).cast<double>();
    return out;
}

}  // namespace testing
