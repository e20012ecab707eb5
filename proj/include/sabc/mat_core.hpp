#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace sabc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Stand-in for numerically infinite diagnostics (condition numbers, VIFs) so
/// they stay representable in JSON and CSV.
inline constexpr double kInfiniteSentinel = 1e18;

/// Correctly rounded floating-point accumulator (Shewchuk's partials
/// algorithm). The result does not depend on the order values are added in,
/// which is what makes means and covariances bitwise permutation-stable.
class ExactSum {
public:
    void add(double x);
    double value() const;

private:
    std::vector<double> partials_;
};

double exact_sum(std::span<const double> values);

/// Column means of an M×k sample matrix.
Vector sample_mean(const Matrix& samples);

/// Unbiased (M−1) cross-covariance of the columns of x (M×p) and y (M×d).
Matrix sample_cov(const Matrix& x, const Matrix& y);

struct SpdSolution {
    Matrix solution;
    double jitter = 0.0;  ///< ladder rung that succeeded (multiple of mean diagonal)
};

/// Solves A·X = B for symmetric A via Cholesky. If the factorization fails or
/// the residual bound ‖AX−B‖ ≤ 1e-8·‖B‖ (max-abs norms) is not met, retries
/// with A + λ·mean(diag A)·I for λ in {1e-12, 1e-10, 1e-8, 1e-6}. Throws
/// NumericalError("singular statistic covariance") carrying a condition
/// estimate when every rung fails.
SpdSolution solve_spd_detailed(const Matrix& a, const Matrix& b);

Matrix solve_spd(const Matrix& a, const Matrix& b);

/// Ratio of extreme absolute eigenvalues of a symmetric matrix (+inf when singular).
double symmetric_condition(const Matrix& a);

bool all_finite(const Matrix& m);

/// Max absolute entry.
double max_abs(const Matrix& m);

}  // namespace sabc
