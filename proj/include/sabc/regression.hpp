#pragma once

#include "sabc/mat_core.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace sabc {

/// Basis expansion F(s) applied to raw statistics before regression.
///
/// Monomial ordering for the polynomial kind: by total degree 1..k, and within
/// one degree by exponent vector in descending lexicographic order. For
/// s = (s₁, s₂) and degree 2 that gives s₁, s₂, s₁², s₁s₂, s₂².
struct BasisSpec {
    enum class Kind { identity, polynomial, powers, custom };

    Kind kind = Kind::identity;
    int degree = 1;                           ///< polynomial only
    std::vector<std::vector<int>> exponents;  ///< powers only, one exponent vector per output
    std::string custom_name;
    std::size_t custom_dim = 0;
    std::function<Vector(const Vector&)> custom_map;
    bool include_intercept = true;

    static BasisSpec identity();
    static BasisSpec polynomial(int degree);
    static BasisSpec powers(std::vector<std::vector<int>> exponents);
    static BasisSpec custom(std::string name, std::size_t output_dim, std::function<Vector(const Vector&)> map);

    void validate() const;
    std::size_t output_dim(std::size_t input_dim) const;

    /// Exponent vectors of the expansion (empty for custom bases).
    std::vector<std::vector<int>> monomials(std::size_t input_dim) const;

    std::string kind_name() const;
};

/// Human-readable monomial such as "s1^2*s2".
std::string monomial_name(const std::vector<int>& exponent);

Vector expand_basis(const Vector& s, const BasisSpec& spec);

/// Row-wise expand_basis over an M×d statistic matrix.
Matrix expand_design(const Matrix& stats, const BasisSpec& spec);

struct LinearFit {
    Vector intercept;         ///< p
    Matrix coefficients;      ///< p×q
    Vector residual_mss;      ///< mean squared residual per response
    double condition_number = 1.0;  ///< extreme singular value ratio of the centered design
    Vector vifs;              ///< q
    double ridge_lambda = 0.0;

    Vector predict(const Vector& x) const { return intercept + coefficients * x; }
};

/// Least squares of responses (M×p) on design (M×q) with an unpenalized
/// intercept, minimizing Σₘ wₘ·M·‖yₘ − α − β·xₘ‖² + λ‖β‖²_F (uniform weights
/// when `weights` is empty). Solved by Householder QR of the centered design,
/// augmented with √λ·I rows for ridge.
///
/// With λ = 0 and a column-scaled condition number above 1e12, throws
/// NumericalError("rank deficient; supply ridge_lambda ...").
LinearFit fit_linear(const Matrix& design, const Matrix& responses, double ridge_lambda,
                     std::span<const double> weights = {}, bool include_intercept = true);

struct ConditionDiagnostics {
    double condition_number = 1.0;  ///< of the centered, column-scaled design
    Vector vifs;                    ///< 1/(1−R²ⱼ), kInfiniteSentinel above 1e12
};

ConditionDiagnostics condition_diagnostics(const Matrix& design);

/// VIFs from a correlation matrix via Schur complements solved with solve_spd.
/// Columns flagged degenerate (zero variance) get the sentinel.
Vector vifs_from_correlation(const Matrix& correlation, const std::vector<bool>& degenerate);

}  // namespace sabc
