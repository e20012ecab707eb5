#include "sabc/bayes_linear.hpp"

#include "sabc/diagnostics.hpp"
#include "sabc/error.hpp"

#include <string>

namespace sabc {

BayesLinearModel fit_bayes_linear(const SimulationBatch& batch) {
    return fit_bayes_linear(batch.thetas, batch.stats);
}

BayesLinearModel fit_bayes_linear(const Matrix& thetas, const Matrix& stats) {
    if (thetas.rows() != stats.rows()) throw ValidationError("fit_bayes_linear: thetas and stats differ in row count");
    const auto d = static_cast<std::size_t>(stats.cols());
    const auto m = static_cast<std::size_t>(stats.rows());
    if (m < d + 2) {
        throw ValidationError("insufficient draws for " + std::to_string(d) + " statistics (have " +
                              std::to_string(m) + ", need " + std::to_string(d + 2) + ")");
    }
    if (!thetas.allFinite() || !stats.allFinite()) throw ValidationError("fit_bayes_linear: non-finite draws");

    BayesLinearModel model;
    model.mean_theta = sample_mean(thetas);
    model.mean_stats = sample_mean(stats);
    model.var_theta = sample_cov(thetas, thetas);
    model.var_stats = sample_cov(stats, stats);
    model.cov_theta_stats = sample_cov(thetas, stats);
    model.n_fit = m;

    if (model.var_stats.diagonal().maxCoeff() <= 0.0) {
        throw ValidationError("fit_bayes_linear: every statistic column is constant");
    }
    // B' = Var(s)⁻¹·Cov(s,θ), using symmetry of Var(s).
    model.coefficients = solve_spd(model.var_stats, model.cov_theta_stats.transpose()).transpose();
    model.intercept = model.mean_theta - model.coefficients * model.mean_stats;
    return model;
}

BayesLinearModel bayes_linear_from_moments(Vector mean_theta, Matrix var_theta, Vector mean_stats,
                                           Matrix var_stats, Matrix cov_theta_stats) {
    const auto p = mean_theta.size();
    const auto d = mean_stats.size();
    if (var_theta.rows() != p || var_theta.cols() != p || var_stats.rows() != d || var_stats.cols() != d ||
        cov_theta_stats.rows() != p || cov_theta_stats.cols() != d) {
        throw ValidationError("bayes_linear_from_moments: inconsistent moment dimensions");
    }
    BayesLinearModel model;
    model.mean_theta = std::move(mean_theta);
    model.var_theta = std::move(var_theta);
    model.mean_stats = std::move(mean_stats);
    model.var_stats = std::move(var_stats);
    model.cov_theta_stats = std::move(cov_theta_stats);
    model.coefficients = solve_spd(model.var_stats, model.cov_theta_stats.transpose()).transpose();
    model.intercept = model.mean_theta - model.coefficients * model.mean_stats;
    model.n_fit = 0;
    return model;
}

Vector adjusted_expectation(const BayesLinearModel& model, const Vector& s) {
    if (static_cast<std::size_t>(s.size()) != model.stat_dim()) {
        throw ValidationError("adjusted_expectation: statistic has length " + std::to_string(s.size()) +
                              ", model expects " + std::to_string(model.stat_dim()));
    }
    const Matrix innovation = s - model.mean_stats;
    return model.mean_theta + model.cov_theta_stats * solve_spd(model.var_stats, innovation);
}

double criterion_value(const Vector& a, const Matrix& b, const SimulationBatch& batch) {
    return criterion_value(a, b, batch.thetas, batch.stats);
}

double criterion_value(const Vector& a, const Matrix& b, const Matrix& thetas, const Matrix& stats) {
    if (thetas.rows() != stats.rows() || a.size() != thetas.cols() || b.rows() != thetas.cols() ||
        b.cols() != stats.cols()) {
        throw ValidationError("criterion_value: inconsistent dimensions");
    }
    if (thetas.rows() == 0) throw ValidationError("no samples");
    ExactSum total;
    for (Eigen::Index m = 0; m < thetas.rows(); ++m) {
        const Vector r = thetas.row(m).transpose() - a - b * stats.row(m).transpose();
        total.add(r.squaredNorm());
    }
    return total.value() / static_cast<double>(thetas.rows());
}

AdjustedVariance adjusted_variance(const BayesLinearModel& model) {
    AdjustedVariance out;
    const Matrix explained = model.cov_theta_stats * solve_spd(model.var_stats, model.cov_theta_stats.transpose());
    Matrix v = model.var_theta - explained;
    out.value = 0.5 * (v + v.transpose());
    if (out.value.size() > 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(out.value, Eigen::EigenvaluesOnly);
        out.min_eigenvalue = eig.eigenvalues().minCoeff();
    }
    out.moment_inconsistent = out.min_eigenvalue < -1e-8;
    if (out.moment_inconsistent) {
        warn("adjusted variance has negative eigenvalue " + std::to_string(out.min_eigenvalue) +
             "; moments are inconsistent");
    }
    return out;
}

}  // namespace sabc
