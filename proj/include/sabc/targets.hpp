#pragma once

#include "sabc/mat_core.hpp"

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace sabc {

/// Scalar functional g(θ) whose posterior mean is an estimand.
struct TargetFunctional {
    enum class Kind { coordinate, gpd_quantile, custom };

    std::string name;
    Kind kind = Kind::coordinate;
    std::size_t index = 0;  ///< coordinate only
    double tau = 0.5;       ///< gpd_quantile only; θ = (σ, ξ)
    std::function<double(const Vector&)> map;  ///< custom only

    static TargetFunctional coordinate(std::size_t index);
    static TargetFunctional gpd_quantile(double tau);
    static TargetFunctional custom(std::string name, std::function<double(const Vector&)> map);

    double operator()(const Vector& theta) const;
};

/// M×p′ matrix whose column j is target j applied to each row of thetas.
Matrix evaluate_targets(const Matrix& thetas, const std::vector<TargetFunctional>& targets);

std::vector<std::string> target_names(const std::vector<TargetFunctional>& targets);

}  // namespace sabc
