#include "doctest.h"
#include "support.hpp"

#include "sabc/abc_engine.hpp"
#include "sabc/error.hpp"
#include "sabc/gpd.hpp"
#include "sabc/models.hpp"
#include "sabc/targets.hpp"

#include <cmath>

using namespace sabc;

TEST_SUITE("models_oracles") {

TEST_CASE("gaussian location oracle") {
    GaussianLocationParams p;
    CHECK(gaussian_location_posterior(p).first == doctest::Approx(0.8).epsilon(1e-15));
    p.xbar_obs = 0.0;
    CHECK(gaussian_location_posterior(p).first == 0.0);
    p.xbar_obs = 1.3;
    p.tau0 = 1e6;
    CHECK(std::abs(gaussian_location_posterior(p).first - 1.3) < 1e-6);

    const ModelFixture fx = gaussian_location_fixture({});
    CHECK(fx.oracle_mean(TargetFunctional::coordinate(0)).value() == doctest::Approx(0.8));
    CHECK(fx.s_obs(0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(fx.s_obs(1) == doctest::Approx(1.0).epsilon(1e-14));
    // The conjugate posterior is N(0.8, 0.2): its median is the mean.
    CHECK(fx.oracle_cdf(0, 0.8).value() == doctest::Approx(0.5));
}

TEST_CASE("gaussian location observed data reproduce s_obs") {
    GaussianLocationParams p;
    p.n = 7;
    p.xbar_obs = -0.4;
    p.sigma = 2.0;
    p.n_noise_stats = 3;
    const ModelFixture fx = gaussian_location_fixture(p);
    REQUIRE(fx.s_obs.size() == 5);
    const Vector x = fx.observed_data.col(0);
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().sum() / (x.size() - 1));
    CHECK(mean == doctest::Approx(-0.4).epsilon(1e-14));
    CHECK(sd == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(fx.s_obs.tail(3).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(gaussian_location_fixture({0, -1, 1, 4, 1, 0}), ValidationError);
}

TEST_CASE("linear gaussian oracle examples") {
    LinearGaussianParams p;
    p.h = (Matrix(2, 2) << 1, 0, 1, 1).finished();
    p.noise_sd = 1.0;
    p.prior_mean = Vector::Zero(2);
    p.prior_cov = Matrix::Identity(2, 2);
    p.s_obs = (Vector(2) << 1, 2).finished();
    const GaussianPosterior post = linear_gaussian_posterior(p);
    CHECK(post.mean(0) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(post.mean(1) == doctest::Approx(0.6).epsilon(1e-14));
    // Posterior covariance is the inverse precision (1/5)[[2,-1],[-1,3]].
    CHECK(post.cov(0, 1) == doctest::Approx(-0.2).epsilon(1e-14));

    LinearGaussianParams exact = p;
    exact.h = Matrix::Identity(2, 2);
    exact.noise_sd = 1e-6;
    CHECK((linear_gaussian_posterior(exact).mean - exact.s_obs).cwiseAbs().maxCoeff() < 1e-9);

    LinearGaussianParams blind = p;
    blind.h = Matrix::Zero(2, 2);
    blind.prior_mean = (Vector(2) << 0.3, -1).finished();
    CHECK((linear_gaussian_posterior(blind).mean - blind.prior_mean).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("linear gaussian simulator matches analytic moments") {
    LinearGaussianParams p;
    p.h = (Matrix(2, 2) << 1, 0, 1, 1).finished();
    p.prior_mean = (Vector(2) << 1, -1).finished();
    p.prior_cov = (Matrix(2, 2) << 1, 0.5, 0.5, 2).finished();
    p.s_obs = Vector::Zero(2);
    p.n_noise_stats = 2;
    const ModelFixture fx = linear_gaussian_fixture(p);
    CHECK(fx.s_obs.size() == 4);
    const SimulationBatch b = simulate_batch(fx.prior, fx.simulator, 50'000, 3);
    const JointMoments m = linear_gaussian_moments(p);
    const Vector sm = sample_mean(b.stats).head(2);
    CHECK((sm - m.mean_stats).cwiseAbs().maxCoeff() < 0.05);
    CHECK((sample_cov(b.thetas, b.thetas) - m.var_theta).cwiseAbs().maxCoeff() < 0.06);
    CHECK((sample_cov(b.thetas, b.stats).leftCols(2) - m.cov_theta_stats).cwiseAbs().maxCoeff() < 0.06);
}

TEST_CASE("gpd quantile examples and branches") {
    CHECK(gpd::quantile(1.0, 0.5, 0.99) == doctest::Approx(18.0).epsilon(1e-14));
    CHECK(gpd::quantile(1.0, 1e-9, 0.99) == doctest::Approx(4.60517).epsilon(1e-6));
    CHECK(TargetFunctional::gpd_quantile(0.99)((Vector(2) << 1, 0.5).finished()) == doctest::Approx(18.0));
    for (double u : {0.5, 0.9, 0.99}) {
        for (double xi : {1e-6, -1e-6}) {
            const double a = gpd::quantile_general(1.0, xi, u);
            const double b = gpd::quantile_small_shape(1.0, xi, u);
            CHECK(std::abs(a - b) / std::abs(a) < 1e-6);
        }
    }
}

TEST_CASE("gpd sample mean converges to sigma/(1-xi)") {
    GpdParams p;
    p.sigma_true = 1.5;
    p.xi_true = 0.2;
    p.n_exceedances = 100'000;
    p.grid_points = 3;
    const ModelFixture fx = gpd_fixture(p);
    const Vector x = fx.observed_data.col(0);
    const double mean = x.mean();
    const double se = std::sqrt((x.array() - mean).square().sum() / (x.size() - 1) / x.size());
    CHECK(std::abs(mean - 1.5 / 0.8) < 3.0 * se);
    CHECK(fx.s_obs.size() == static_cast<Eigen::Index>(kGpdStatDim));
}

TEST_CASE("gpd statistics ladder") {
    std::vector<double> x(101);
    for (int i = 0; i <= 100; ++i) x[i] = i;
    const Vector s = gpd_statistics(x);
    CHECK(s(0) == doctest::Approx(10.0));
    CHECK(s(10) == doctest::Approx(99.0));
    CHECK(s(11) == doctest::Approx(50.0));
}

TEST_CASE("gpd log density integrates to one") {
    double total = 0;
    const double h = 1e-3;
    for (double x = h / 2; x < 200; x += h) total += std::exp(gpd::log_density(x, 1.0, 0.3)) * h;
    CHECK(total == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(std::isinf(gpd::log_density(-1.0, 1.0, 0.3)));
    // Bounded support for negative shape.
    CHECK(std::isinf(gpd::log_density(3.0, 1.0, -0.5)));
}

TEST_CASE("gpd grid oracle is stable under 10x refinement") {
    GpdParams p;
    p.grid_points = 3;
    const ModelFixture fx = gpd_fixture(p);
    const std::vector<double> data(fx.observed_data.data(), fx.observed_data.data() + fx.observed_data.rows());
    const GpdGridPosterior coarse(data, p.sigma_prior, p.xi_prior, 200);
    const GpdGridPosterior fine(data, p.sigma_prior, p.xi_prior, 2000);
    for (double tau : {0.5, 0.9, 0.99}) {
        auto q = [tau](double s, double xi) { return gpd::quantile(s, xi, tau); };
        const double a = coarse.expectation(q), b = fine.expectation(q);
        CHECK(std::abs(a - b) / std::abs(b) < 0.005);
    }
}

TEST_CASE("gpd grid oracle matches brute-force quadrature") {
    // Independent midpoint rule on (σ, ξ) directly, without the log-σ mapping.
    GpdParams p;
    p.n_exceedances = 50;
    p.grid_points = 3;
    const ModelFixture fx = gpd_fixture(p);
    const std::vector<double> data(fx.observed_data.data(), fx.observed_data.data() + fx.observed_data.rows());
    const GpdGridPosterior grid(data, p.sigma_prior, p.xi_prior, 400);

    const double s_lo = p.sigma_prior.quantile(0.001), s_hi = p.sigma_prior.quantile(0.999);
    const double x_lo = p.xi_prior.quantile(0.001), x_hi = p.xi_prior.quantile(0.999);
    const int n = 600;
    std::vector<double> lp;
    std::vector<std::pair<double, double>> nodes;
    for (int i = 0; i < n; ++i) {
        const double s = s_lo + (s_hi - s_lo) * (i + 0.5) / n;
        for (int j = 0; j < n; ++j) {
            const double xi = x_lo + (x_hi - x_lo) * (j + 0.5) / n;
            double l = p.sigma_prior.log_density(s) + p.xi_prior.log_density(xi);
            for (double v : data) l += gpd::log_density(v, s, xi);
            lp.push_back(l);
            nodes.emplace_back(s, xi);
        }
    }
    const double mx = *std::max_element(lp.begin(), lp.end());
    long double z = 0, m1 = 0;
    for (std::size_t k = 0; k < lp.size(); ++k) {
        const long double w = std::exp(lp[k] - mx);
        z += w;
        m1 += w * gpd::quantile(nodes[k].first, nodes[k].second, 0.9);
    }
    const double brute = static_cast<double>(m1 / z);
    const double ours = grid.expectation([](double s, double xi) { return gpd::quantile(s, xi, 0.9); });
    CHECK(std::abs(ours - brute) / brute < 0.01);
}

TEST_CASE("two point fixture oracle") {
    const ModelFixture fx = two_point_fixture(0.2);
    CHECK(fx.oracle_mean(TargetFunctional::coordinate(0)).value() == doctest::Approx(0.8));
    CHECK_THROWS_AS(two_point_fixture(0.5), ValidationError);
}

TEST_CASE("targets evaluate column-wise in order") {
    const Matrix th = (Matrix(2, 2) << 1, 0.5, 2, 0.5).finished();
    const Matrix e = evaluate_targets(th, {TargetFunctional::coordinate(0), TargetFunctional::gpd_quantile(0.99)});
    CHECK(e.col(0) == th.col(0));
    CHECK(e(0, 1) == doctest::Approx(18.0));
    CHECK(e(1, 1) == doctest::Approx(36.0));
    CHECK(target_names({TargetFunctional::coordinate(1), TargetFunctional::gpd_quantile(0.9)}) ==
          std::vector<std::string>{"theta_2", "q_0.9"});
}

}
