#include "doctest.h"
#include "support.hpp"

#include "sabc/bayes_linear.hpp"
#include "sabc/diagnostics.hpp"
#include "sabc/error.hpp"
#include "sabc/models.hpp"
#include "sabc/regression.hpp"

using namespace sabc;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

}  // namespace

TEST_SUITE("bayes_linear") {

TEST_CASE("perfect statistic gives identity coefficients") {
    const Matrix th = testing::gaussian_matrix(10'000, 2, 1);
    const BayesLinearModel m = fit_bayes_linear(th, th);
    CHECK((m.coefficients - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(m.intercept.cwiseAbs().maxCoeff() < 1e-6);
    CHECK(m.n_fit == 10'000);
}

TEST_CASE("noisy statistic gives coefficient one half") {
    const Matrix th = testing::gaussian_matrix(100'000, 1, 2);
    const Matrix s = th + testing::gaussian_matrix(100'000, 1, 3);
    CHECK(std::abs(fit_bayes_linear(th, s).coefficients(0, 0) - 0.5) < 0.02);
}

TEST_CASE("independent statistic gives zero coefficient") {
    const Matrix th = testing::gaussian_matrix(20'000, 1, 4);
    const Matrix s = testing::gaussian_matrix(20'000, 1, 5);
    const BayesLinearModel m = fit_bayes_linear(th, s);
    CHECK(std::abs(m.coefficients(0, 0)) < 0.03);
    CHECK(std::abs(m.intercept(0) - th.col(0).mean()) < 0.01);
}

TEST_CASE("intercept identity a = E(theta) - B E(s)") {
    const Matrix s = testing::gaussian_matrix(300, 4, 6);
    const Matrix th = s * testing::gaussian_matrix(4, 2, 7) + testing::gaussian_matrix(300, 2, 8);
    const BayesLinearModel m = fit_bayes_linear(th, s);
    const Vector rhs = m.mean_theta - m.coefficients * m.mean_stats;
    CHECK((m.intercept - rhs).cwiseAbs().maxCoeff() <= 1e-10 * std::max(1.0, rhs.cwiseAbs().maxCoeff()));
    CHECK((m.var_stats - m.var_stats.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("insufficient draws") {
    CHECK_THROWS_WITH_AS(fit_bayes_linear(Matrix::Zero(4, 1), testing::gaussian_matrix(4, 3, 1)),
                         doctest::Contains("insufficient draws for 3 statistics (have 4, need 5)"), ValidationError);
}

TEST_CASE("adjusted_expectation examples") {
    const BayesLinearModel m = bayes_linear_from_moments(Vector::Zero(1), scalar(1), Vector::Zero(1), scalar(2), scalar(1));
    CHECK(adjusted_expectation(m, Vector::Constant(1, 2.0))(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(adjusted_expectation(m, Vector::Zero(1))(0) == 0.0);

    const BayesLinearModel flat =
        bayes_linear_from_moments(Vector::Constant(1, 3.0), scalar(1), Vector::Zero(1), scalar(2), scalar(0));
    CHECK(adjusted_expectation(flat, Vector::Constant(1, 17.0))(0) == 3.0);
    CHECK_THROWS_AS(adjusted_expectation(flat, Vector::Zero(2)), ValidationError);
}

TEST_CASE("adjusted_expectation equals exact Gaussian posterior with analytic moments") {
    LinearGaussianParams p;
    p.h = (Matrix(2, 2) << 1, 0, 1, 1).finished();
    p.noise_sd = 1.0;
    p.prior_mean = Vector::Zero(2);
    p.prior_cov = Matrix::Identity(2, 2);
    p.s_obs = (Vector(2) << 1, 2).finished();
    const JointMoments mom = linear_gaussian_moments(p);
    const BayesLinearModel m =
        bayes_linear_from_moments(mom.mean_theta, mom.var_theta, mom.mean_stats, mom.var_stats, mom.cov_theta_stats);
    // Precision I + HᵀH = [[3,1],[1,2]], Hᵀs = (3,2), so the mean is (4/5, 3/5).
    const Vector e = adjusted_expectation(m, p.s_obs);
    CHECK(std::abs(e(0) - 0.8) < 1e-12);
    CHECK(std::abs(e(1) - 0.6) < 1e-12);
}

TEST_CASE("criterion_value examples") {
    const Matrix s = testing::gaussian_matrix(100, 2, 9);
    const Vector a = (Vector(1) << 0.5).finished();
    const Matrix b = (Matrix(1, 2) << 2, -1).finished();
    const Matrix th = (s * b.transpose()).rowwise() + a.transpose();
    CHECK(criterion_value(a, b, th, s) == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(criterion_value(Vector::Zero(1), Matrix::Zero(1, 2), th, s) ==
          doctest::Approx(th.squaredNorm() / 100.0).epsilon(1e-14));
}

TEST_CASE("fitted estimator beats random perturbations") {
    std::mt19937_64 gen(10);
    std::normal_distribution<double> z;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix s = testing::gaussian_matrix(200, 3, 20 + seed);
        const Matrix th = s * testing::gaussian_matrix(3, 2, 40 + seed) + testing::gaussian_matrix(200, 2, 60 + seed);
        const BayesLinearModel m = fit_bayes_linear(th, s);
        const double best = criterion_value(m.intercept, m.coefficients, th, s);
        for (int k = 0; k < 100; ++k) {
            Vector da(2);
            Matrix db(2, 3);
            for (int i = 0; i < 2; ++i) da(i) = 1e-3 * z(gen);
            for (int i = 0; i < 6; ++i) db.data()[i] = 1e-3 * z(gen);
            CHECK(best < criterion_value(m.intercept + da, m.coefficients + db, th, s));
        }
    }
}

TEST_CASE("OLS equivalence") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Matrix s = testing::gaussian_matrix(150, 5, 300 + seed);
        const Matrix th = s * testing::gaussian_matrix(5, 3, 400 + seed) + testing::gaussian_matrix(150, 3, 500 + seed);
        const BayesLinearModel m = fit_bayes_linear(th, s);
        const LinearFit f = fit_linear(s, th, 0.0);
        const Vector q = testing::gaussian_matrix(5, 1, 600 + seed).col(0);
        CHECK((adjusted_expectation(m, q) - f.predict(q)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("affine invariance of adjusted expectation and optimum criterion") {
    const Matrix s = testing::gaussian_matrix(400, 3, 11);
    const Matrix th = s * testing::gaussian_matrix(3, 2, 12) + testing::gaussian_matrix(400, 2, 13);
    Matrix t(3, 3);
    t << 2, 0.3, 0, 0.1, 1, 0.2, 0, 0.5, 3;
    const Vector c = (Vector(3) << 1, -2, 5).finished();
    const Matrix s2 = (s * t.transpose()).rowwise() + c.transpose();
    const BayesLinearModel m1 = fit_bayes_linear(th, s), m2 = fit_bayes_linear(th, s2);
    const Vector q = (Vector(3) << 0.3, -0.7, 1.1).finished();
    CHECK((adjusted_expectation(m1, q) - adjusted_expectation(m2, t * q + c)).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(criterion_value(m1.intercept, m1.coefficients, th, s) ==
          doctest::Approx(criterion_value(m2.intercept, m2.coefficients, th, s2)).epsilon(1e-9));
}

TEST_CASE("adjusted_variance examples") {
    const BayesLinearModel m = bayes_linear_from_moments(Vector::Zero(1), scalar(1), Vector::Zero(1), scalar(2), scalar(1));
    CHECK(adjusted_variance(m).value(0, 0) == doctest::Approx(0.5).epsilon(1e-15));

    const BayesLinearModel flat = bayes_linear_from_moments(Vector::Zero(1), scalar(3), Vector::Zero(1), scalar(2), scalar(0));
    CHECK(adjusted_variance(flat).value(0, 0) == 3.0);

    const Matrix th = testing::gaussian_matrix(1000, 2, 14);
    CHECK(adjusted_variance(fit_bayes_linear(th, th)).value.cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("inconsistent moments are flagged with a warning") {
    std::vector<std::string> seen;
    auto prev = set_warning_handler([&](const std::string& m) { seen.push_back(m); });
    const BayesLinearModel bad = bayes_linear_from_moments(Vector::Zero(1), scalar(0.1), Vector::Zero(1), scalar(1), scalar(1));
    const AdjustedVariance v = adjusted_variance(bad);
    set_warning_handler(prev);
    CHECK(v.moment_inconsistent);
    CHECK(v.min_eigenvalue < -1e-8);
    CHECK(seen.size() == 1);
}

}
