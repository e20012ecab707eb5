#include "sabc/targets.hpp"

#include "sabc/error.hpp"
#include "sabc/gpd.hpp"
#include "sabc/util.hpp"

#include <cmath>

namespace sabc {

TargetFunctional TargetFunctional::coordinate(std::size_t index) {
    TargetFunctional t;
    t.kind = Kind::coordinate;
    t.index = index;
    t.name = "theta_" + std::to_string(index + 1);
    return t;
}

TargetFunctional TargetFunctional::gpd_quantile(double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("gpd_quantile: tau must be in (0,1)");
    TargetFunctional t;
    t.kind = Kind::gpd_quantile;
    t.tau = tau;
    t.name = "q_" + format_double(tau);
    return t;
}

TargetFunctional TargetFunctional::custom(std::string name, std::function<double(const Vector&)> map) {
    if (!map) throw ValidationError("custom target '" + name + "' has no map");
    TargetFunctional t;
    t.kind = Kind::custom;
    t.name = std::move(name);
    t.map = std::move(map);
    return t;
}

double TargetFunctional::operator()(const Vector& theta) const {
    switch (kind) {
        case Kind::coordinate:
            if (static_cast<Eigen::Index>(index) >= theta.size()) {
                throw ValidationError("target " + name + ": coordinate out of range");
            }
            return theta(static_cast<Eigen::Index>(index));
        case Kind::gpd_quantile:
            if (theta.size() < 2) throw ValidationError("target " + name + ": needs theta = (sigma, xi)");
            return gpd::quantile(theta(0), theta(1), tau);
        case Kind::custom:
            return map(theta);
    }
    return 0.0;
}

Matrix evaluate_targets(const Matrix& thetas, const std::vector<TargetFunctional>& targets) {
    if (targets.empty()) throw ValidationError("evaluate_targets: no targets");
    Matrix out(thetas.rows(), static_cast<Eigen::Index>(targets.size()));
    for (Eigen::Index m = 0; m < thetas.rows(); ++m) {
        const Vector theta = thetas.row(m).transpose();
        for (std::size_t j = 0; j < targets.size(); ++j) {
            const double v = targets[j](theta);
            if (!std::isfinite(v)) {
                throw NumericalError("target " + targets[j].name + " is non-finite at draw " + std::to_string(m));
            }
            out(m, static_cast<Eigen::Index>(j)) = v;
        }
    }
    return out;
}

std::vector<std::string> target_names(const std::vector<TargetFunctional>& targets) {
    std::vector<std::string> names;
    names.reserve(targets.size());
    for (const auto& t : targets) names.push_back(t.name);
    return names;
}

namespace gpd {

double quantile_general(double sigma, double xi, double u) {
    return sigma * std::expm1(-xi * std::log1p(-u)) / xi;
}

double quantile_small_shape(double sigma, double xi, double u) {
    const double l = -std::log1p(-u);
    return sigma * l * (1.0 + 0.5 * xi * l);
}

double quantile(double sigma, double xi, double u) {
    if (std::abs(xi) < kSmallShape) return quantile_small_shape(sigma, xi, u);
    return quantile_general(sigma, xi, u);
}

double log_density(double x, double sigma, double xi) {
    if (!(sigma > 0.0) || x < 0.0) return -INFINITY;
    const double z = x / sigma;
    if (std::abs(xi) < kSmallShape) return -std::log(sigma) - z;
    const double arg = xi * z;
    if (!(arg > -1.0)) return -INFINITY;
    return -std::log(sigma) - (1.0 + 1.0 / xi) * std::log1p(arg);
}

}  // namespace gpd

}  // namespace sabc
