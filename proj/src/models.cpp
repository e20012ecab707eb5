#include "sabc/models.hpp"

#include "sabc/empirical.hpp"
#include "sabc/error.hpp"
#include "sabc/gpd.hpp"
#include "sabc/parallel.hpp"
#include "sabc/util.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace sabc {

std::optional<double> ModelFixture::oracle_mean(const TargetFunctional& target) const {
    if (!oracle.posterior_mean) return std::nullopt;
    return oracle.posterior_mean(target);
}

std::optional<double> ModelFixture::oracle_cdf(std::size_t coordinate, double x) const {
    if (!oracle.marginal_cdf) return std::nullopt;
    return oracle.marginal_cdf(coordinate, x);
}

namespace {

double normal_cdf(double x, double mean, double sd) {
    return 0.5 * std::erfc(-(x - mean) / (sd * std::sqrt(2.0)));
}

std::string vector_text(const Vector& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += format_double(v(i));
    }
    return s + "]";
}

std::string matrix_text(const Matrix& m) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) s += ",";
        s += vector_text(m.row(i).transpose());
    }
    return s + "]";
}

/// Posterior mean of a target under a Gaussian posterior: exact for
/// coordinates, unavailable otherwise.
std::function<std::optional<double>(const TargetFunctional&)> gaussian_mean_oracle(Vector mean) {
    return [mean = std::move(mean)](const TargetFunctional& t) -> std::optional<double> {
        if (t.kind != TargetFunctional::Kind::coordinate) return std::nullopt;
        if (static_cast<Eigen::Index>(t.index) >= mean.size()) return std::nullopt;
        return mean(static_cast<Eigen::Index>(t.index));
    };
}

}  // namespace

// --- Gaussian location -------------------------------------------------------

std::pair<double, double> gaussian_location_posterior(const GaussianLocationParams& p) {
    const double prior_prec = 1.0 / (p.tau0 * p.tau0);
    const double data_prec = static_cast<double>(p.n) / (p.sigma * p.sigma);
    const double var = 1.0 / (prior_prec + data_prec);
    const double mean = var * (p.mu0 * prior_prec + p.xbar_obs * data_prec);
    return {mean, std::sqrt(var)};
}

ModelFixture gaussian_location_fixture(const GaussianLocationParams& p) {
    if (!(p.tau0 > 0.0) || !(p.sigma > 0.0)) throw ValidationError("gaussian_location: tau0 and sigma must be > 0");
    if (p.n < 1) throw ValidationError("gaussian_location: n must be >= 1");

    ModelFixture f;
    f.name = "gaussian_location";
    f.params = "mu0=" + format_double(p.mu0) + ",tau0=" + format_double(p.tau0) + ",sigma=" + format_double(p.sigma) +
               ",n=" + std::to_string(p.n) + ",xbar_obs=" + format_double(p.xbar_obs) +
               ",n_noise_stats=" + std::to_string(p.n_noise_stats);
    f.prior.coordinates = {CoordinatePrior::normal(p.mu0, p.tau0)};

    const std::size_t n = p.n;
    const double sigma = p.sigma;
    const std::size_t noise = p.n_noise_stats;
    f.simulator.name = f.name;
    f.simulator.param_dim = 1;
    f.simulator.stat_dim = 2 + noise;
    f.simulator.simulate = [n, sigma, noise](const Vector& theta, DrawStream& rng) {
        double sum = 0.0;
        double sum_sq = 0.0;
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = rng.normal(theta(0), sigma);
            sum += x[i];
        }
        const double mean = sum / static_cast<double>(n);
        for (double v : x) sum_sq += (v - mean) * (v - mean);
        Vector s(static_cast<Eigen::Index>(2 + noise));
        s(0) = mean;
        s(1) = n > 1 ? std::sqrt(sum_sq / static_cast<double>(n - 1)) : 0.0;
        for (std::size_t k = 0; k < noise; ++k) s(static_cast<Eigen::Index>(2 + k)) = rng.normal();
        return s;
    };

    // Evenly spaced standardized pattern: mean 0, sample sd 1.
    f.observed_data.resize(static_cast<Eigen::Index>(n), 1);
    double pattern_ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = static_cast<double>(i) - 0.5 * static_cast<double>(n - 1);
        pattern_ss += z * z;
    }
    const double pattern_sd = n > 1 ? std::sqrt(pattern_ss / static_cast<double>(n - 1)) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = n > 1 ? (static_cast<double>(i) - 0.5 * static_cast<double>(n - 1)) / pattern_sd : 0.0;
        f.observed_data(static_cast<Eigen::Index>(i), 0) = p.xbar_obs + sigma * z;
    }
    f.s_obs = Vector::Zero(static_cast<Eigen::Index>(2 + noise));
    f.s_obs(0) = p.xbar_obs;
    f.s_obs(1) = n > 1 ? sigma : 0.0;
    f.default_targets = {TargetFunctional::coordinate(0)};

    const auto [post_mean, post_sd] = gaussian_location_posterior(p);
    Vector mean(1);
    mean(0) = post_mean;
    f.oracle.posterior_mean = gaussian_mean_oracle(mean);
    f.oracle.marginal_cdf = [post_mean, post_sd](std::size_t i, double x) -> std::optional<double> {
        if (i != 0) return std::nullopt;
        return normal_cdf(x, post_mean, post_sd);
    };
    return f;
}

// --- linear Gaussian ---------------------------------------------------------

void LinearGaussianParams::validate() const {
    const auto p = prior_mean.size();
    const auto d = h.rows();
    if (p == 0 || d == 0) throw ValidationError("linear_gaussian: empty dimensions");
    if (h.cols() != p) throw ValidationError("linear_gaussian: H must be d x p");
    if (prior_cov.rows() != p || prior_cov.cols() != p) throw ValidationError("linear_gaussian: prior_cov must be p x p");
    if (s_obs.size() != d) throw ValidationError("linear_gaussian: s_obs must have length d");
    if (!(noise_sd > 0.0)) throw ValidationError("linear_gaussian: noise_sd must be > 0");
}

GaussianPosterior linear_gaussian_posterior(const LinearGaussianParams& p) {
    p.validate();
    const double noise_prec = 1.0 / (p.noise_sd * p.noise_sd);
    const Eigen::LLT<Matrix> prior_llt(p.prior_cov);
    if (prior_llt.info() != Eigen::Success) throw ValidationError("linear_gaussian: prior_cov is not positive definite");
    const Matrix prior_prec = prior_llt.solve(Matrix::Identity(p.prior_cov.rows(), p.prior_cov.cols()));
    const Matrix post_prec = prior_prec + noise_prec * p.h.transpose() * p.h;
    const Eigen::LLT<Matrix> post_llt(post_prec);
    GaussianPosterior out;
    out.cov = post_llt.solve(Matrix::Identity(post_prec.rows(), post_prec.cols()));
    out.mean = out.cov * (prior_prec * p.prior_mean + noise_prec * p.h.transpose() * p.s_obs);
    return out;
}

JointMoments linear_gaussian_moments(const LinearGaussianParams& p) {
    p.validate();
    JointMoments m;
    m.mean_theta = p.prior_mean;
    m.var_theta = p.prior_cov;
    m.mean_stats = p.h * p.prior_mean;
    m.var_stats = p.h * p.prior_cov * p.h.transpose() +
                  p.noise_sd * p.noise_sd * Matrix::Identity(p.h.rows(), p.h.rows());
    m.cov_theta_stats = p.prior_cov * p.h.transpose();
    return m;
}

ModelFixture linear_gaussian_fixture(const LinearGaussianParams& p) {
    p.validate();
    ModelFixture f;
    f.name = "linear_gaussian";
    f.params = "H=" + matrix_text(p.h) + ",noise_sd=" + format_double(p.noise_sd) +
               ",prior_mean=" + vector_text(p.prior_mean) + ",prior_cov=" + matrix_text(p.prior_cov) +
               ",s_obs=" + vector_text(p.s_obs) + ",n_noise_stats=" + std::to_string(p.n_noise_stats);
    f.prior.joint_normal = JointNormalPrior::make(p.prior_mean, p.prior_cov);

    const Matrix h = p.h;
    const double noise_sd = p.noise_sd;
    const std::size_t noise = p.n_noise_stats;
    const auto d = static_cast<std::size_t>(p.h.rows());
    f.simulator.name = f.name;
    f.simulator.param_dim = static_cast<std::size_t>(p.h.cols());
    f.simulator.stat_dim = d + noise;
    f.simulator.simulate = [h, noise_sd, noise, d](const Vector& theta, DrawStream& rng) {
        Vector s(static_cast<Eigen::Index>(d + noise));
        const Vector signal = h * theta;
        for (std::size_t j = 0; j < d; ++j) {
            s(static_cast<Eigen::Index>(j)) = signal(static_cast<Eigen::Index>(j)) + noise_sd * rng.normal();
        }
        for (std::size_t k = 0; k < noise; ++k) s(static_cast<Eigen::Index>(d + k)) = rng.normal();
        return s;
    };

    f.s_obs = Vector::Zero(static_cast<Eigen::Index>(d + noise));
    f.s_obs.head(static_cast<Eigen::Index>(d)) = p.s_obs;
    f.observed_data = f.s_obs.transpose();
    for (std::size_t i = 0; i < f.simulator.param_dim; ++i) f.default_targets.push_back(TargetFunctional::coordinate(i));

    const GaussianPosterior post = linear_gaussian_posterior(p);
    f.oracle.posterior_mean = gaussian_mean_oracle(post.mean);
    f.oracle.marginal_cdf = [post](std::size_t i, double x) -> std::optional<double> {
        if (static_cast<Eigen::Index>(i) >= post.mean.size()) return std::nullopt;
        const auto k = static_cast<Eigen::Index>(i);
        return normal_cdf(x, post.mean(k), std::sqrt(post.cov(k, k)));
    };
    return f;
}

// --- generalized Pareto --------------------------------------------------------

Vector gpd_statistics(std::span<const double> sample) {
    if (sample.size() < 2) throw ValidationError("gpd_statistics: need at least 2 exceedances");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    Vector s(static_cast<Eigen::Index>(kGpdStatDim));
    for (std::size_t k = 0; k < kGpdLadder.size(); ++k) {
        s(static_cast<Eigen::Index>(k)) = type7_quantile(sorted, kGpdLadder[k]);
    }
    double sum = 0.0;
    for (double x : sorted) sum += x;
    const double mean = sum / static_cast<double>(sorted.size());
    double ss = 0.0;
    for (double x : sorted) ss += (x - mean) * (x - mean);
    s(static_cast<Eigen::Index>(kGpdLadder.size())) = mean;
    s(static_cast<Eigen::Index>(kGpdLadder.size() + 1)) = std::sqrt(ss / static_cast<double>(sorted.size() - 1));
    return s;
}

GpdGridPosterior::GpdGridPosterior(std::span<const double> exceedances, CoordinatePrior sigma_prior,
                                   CoordinatePrior xi_prior, std::size_t grid_points) {
    if (grid_points < 2) throw ValidationError("gpd grid: need at least 2 points per axis");
    if (exceedances.empty()) throw ValidationError("gpd grid: no data");
    const double sigma_lo = sigma_prior.quantile(0.001);
    const double sigma_hi = sigma_prior.quantile(0.999);
    if (!(sigma_lo > 0.0)) throw ValidationError("gpd grid: sigma prior must be supported on (0, inf)");
    const double ls_lo = std::log(sigma_lo);
    const double ls_hi = std::log(sigma_hi);
    const double xi_lo = xi_prior.quantile(0.001);
    const double xi_hi = xi_prior.quantile(0.999);

    const std::size_t n = grid_points;
    log_sigma_.resize(n);
    xi_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        log_sigma_[i] = ls_lo + t * (ls_hi - ls_lo);
        xi_[i] = xi_lo + t * (xi_hi - xi_lo);
    }

    const std::vector<double> data(exceedances.begin(), exceedances.end());
    Matrix log_post(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    parallel_for(n, [&](std::size_t i) {
        const double sigma = std::exp(log_sigma_[i]);
        const double lp_sigma = sigma_prior.log_density(sigma) + log_sigma_[i];
        for (std::size_t j = 0; j < n; ++j) {
            double lp = lp_sigma + xi_prior.log_density(xi_[j]);
            for (double x : data) {
                if (!std::isfinite(lp)) break;
                lp += gpd::log_density(x, sigma, xi_[j]);
            }
            log_post(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = lp;
        }
    });

    const double top = log_post.maxCoeff();
    if (!std::isfinite(top)) throw NumericalError("gpd grid: posterior has no mass on the grid");
    weights_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    ExactSum total;
    for (std::size_t i = 0; i < n; ++i) {
        const double wi = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double wj = (j == 0 || j + 1 == n) ? 0.5 : 1.0;
            const auto ii = static_cast<Eigen::Index>(i);
            const auto jj = static_cast<Eigen::Index>(j);
            const double lp = log_post(ii, jj);
            weights_(ii, jj) = std::isfinite(lp) ? wi * wj * std::exp(lp - top) : 0.0;
            total.add(weights_(ii, jj));
        }
    }
    weights_ /= total.value();
}

double GpdGridPosterior::expectation(const std::function<double(double, double)>& g) const {
    ExactSum acc;
    for (std::size_t i = 0; i < log_sigma_.size(); ++i) {
        const double sigma = std::exp(log_sigma_[i]);
        for (std::size_t j = 0; j < xi_.size(); ++j) {
            const double w = weights_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (w == 0.0) continue;
            acc.add(w * g(sigma, xi_[j]));
        }
    }
    return acc.value();
}

ModelFixture gpd_fixture(const GpdParams& p) {
    if (!(p.sigma_true > 0.0)) throw ValidationError("gpd: sigma_true must be > 0");
    if (!(p.xi_true > -0.5)) throw ValidationError("gpd: xi_true must be > -0.5");
    if (p.observed.empty() && p.n_exceedances < 2) throw ValidationError("gpd: need at least 2 exceedances");
    if (!p.observed.empty() && p.observed.size() < 2) throw ValidationError("gpd: need at least 2 observations");
    for (double x : p.observed)
        if (!(x >= 0.0 && std::isfinite(x))) throw ValidationError("gpd: observed exceedances must be finite and >= 0");
    for (double tau : p.tau_grid) {
        if (!(tau > 0.0 && tau < 1.0)) throw ValidationError("gpd: taus must lie in (0,1)");
    }
    p.sigma_prior.validate();
    p.xi_prior.validate();

    ModelFixture f;
    f.name = "gpd";
    std::string taus;
    for (std::size_t k = 0; k < p.tau_grid.size(); ++k) taus += (k ? ";" : "") + format_double(p.tau_grid[k]);
    f.params = "sigma_true=" + format_double(p.sigma_true) + ",xi_true=" + format_double(p.xi_true) +
               ",n_exceedances=" + std::to_string(p.n_exceedances) + ",tau_grid=[" + taus +
               "],obs_seed=" + std::to_string(p.obs_seed) + ",grid_points=" + std::to_string(p.grid_points) +
               (p.observed.empty() ? std::string() : ",observed=" + std::to_string(p.observed.size()) + " values") +
               ",prior=" + p.sigma_prior.describe() + "|" + p.xi_prior.describe();
    f.prior.coordinates = {p.sigma_prior, p.xi_prior};

    const std::size_t n = p.observed.empty() ? p.n_exceedances : p.observed.size();
    f.simulator.name = f.name;
    f.simulator.param_dim = 2;
    f.simulator.stat_dim = kGpdStatDim;
    f.simulator.simulate = [n](const Vector& theta, DrawStream& rng) {
        std::vector<double> sample(n);
        for (auto& x : sample) x = gpd::quantile(theta(0), theta(1), rng.uniform());
        return gpd_statistics(sample);
    };

    std::vector<double> data = p.observed;
    if (data.empty()) {
        DrawStream obs_rng(p.obs_seed, 0, stream_domain::kObserved);
        data.resize(n);
        for (auto& x : data) x = gpd::quantile(p.sigma_true, p.xi_true, obs_rng.uniform());
    }
    f.observed_data = Eigen::Map<const Vector>(data.data(), static_cast<Eigen::Index>(n));
    f.s_obs = gpd_statistics(data);
    for (double tau : p.tau_grid) f.default_targets.push_back(TargetFunctional::gpd_quantile(tau));

    auto grid = std::make_shared<const GpdGridPosterior>(data, p.sigma_prior, p.xi_prior, p.grid_points);
    f.oracle.posterior_mean = [grid](const TargetFunctional& t) -> std::optional<double> {
        return grid->expectation([&t](double sigma, double xi) {
            Vector theta(2);
            theta << sigma, xi;
            return t(theta);
        });
    };
    return f;
}

// --- two-point toy -------------------------------------------------------------

ModelFixture two_point_fixture(double flip_prob) {
    if (!(flip_prob >= 0.0 && flip_prob < 0.5)) throw ValidationError("two_point: flip_prob must be in [0, 0.5)");
    ModelFixture f;
    f.name = "two_point";
    f.params = "flip_prob=" + format_double(flip_prob);
    f.prior.coordinates = {CoordinatePrior::discrete({0.0, 1.0}, {0.5, 0.5})};
    f.simulator.name = f.name;
    f.simulator.param_dim = 1;
    f.simulator.stat_dim = 1;
    f.simulator.simulate = [flip_prob](const Vector& theta, DrawStream& rng) {
        Vector s(1);
        const bool flip = rng.uniform() < flip_prob;
        s(0) = flip ? 1.0 - theta(0) : theta(0);
        return s;
    };
    f.s_obs = Vector::Ones(1);
    f.observed_data = f.s_obs.transpose();
    f.default_targets = {TargetFunctional::coordinate(0)};

    const double p1 = 1.0 - flip_prob;  // P(θ=1 | s=1) with equal prior mass
    f.oracle.posterior_mean = [p1](const TargetFunctional& t) -> std::optional<double> {
        if (t.kind != TargetFunctional::Kind::coordinate || t.index != 0) return std::nullopt;
        return p1;
    };
    f.oracle.marginal_cdf = [p1](std::size_t i, double x) -> std::optional<double> {
        if (i != 0) return std::nullopt;
        if (x < 0.0) return 0.0;
        if (x < 1.0) return 1.0 - p1;
        return 1.0;
    };
    return f;
}

}  // namespace sabc
