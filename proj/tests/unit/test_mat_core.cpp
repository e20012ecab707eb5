#include "doctest.h"
#include "support.hpp"

#include "sabc/error.hpp"
#include "sabc/mat_core.hpp"

#include <algorithm>
#include <numeric>

using namespace sabc;

TEST_SUITE("mat_core") {

TEST_CASE("sample_mean examples") {
    Matrix a(3, 1);
    a << 1, 2, 3;
    CHECK(sample_mean(a)(0) == 2.0);

    Matrix b(1, 2);
    b << 0, 5;
    CHECK(sample_mean(b) == Vector((Vector(2) << 0, 5).finished()));

    Matrix c(2, 2);
    c << 1, 2, 3, 6;
    CHECK(sample_mean(c)(0) == 2.0);
    CHECK(sample_mean(c)(1) == 4.0);

    CHECK_THROWS_WITH_AS(sample_mean(Matrix(0, 2)), "no samples", ValidationError);
}

TEST_CASE("sample_cov examples") {
    Matrix x(3, 1), y(3, 1);
    x << 1, 2, 3;
    y << 2, 4, 6;
    CHECK(sample_cov(x, y)(0, 0) == doctest::Approx(2.0).epsilon(1e-15));

    Matrix k(3, 2);
    k << 5, 1, 5, 2, 5, 7;
    const Matrix c = sample_cov(k, y);
    CHECK(c(0, 0) == 0.0);

    CHECK_THROWS_AS(sample_cov(Matrix::Ones(1, 1), Matrix::Ones(1, 1)), ValidationError);
    CHECK_THROWS_AS(sample_cov(Matrix::Ones(3, 1), Matrix::Ones(4, 1)), ValidationError);
}

TEST_CASE("sample_cov symmetry and transpose identity are exact") {
    const Matrix s = testing::gaussian_matrix(200, 5, 1);
    const Matrix t = testing::gaussian_matrix(200, 3, 2);
    const Matrix v = sample_cov(s, s);
    CHECK((v - v.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((sample_cov(s, t) - sample_cov(t, s).transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mean and covariance are bitwise permutation invariant") {
    const Matrix s = testing::gaussian_matrix(1000, 4, 3) * 1e3;
    std::vector<int> order(1000);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 gen(9);
    for (int trial = 0; trial < 5; ++trial) {
        std::shuffle(order.begin(), order.end(), gen);
        Matrix p(1000, 4);
        for (int i = 0; i < 1000; ++i) p.row(i) = s.row(order[i]);
        CHECK(sample_mean(p) == sample_mean(s));
        CHECK(sample_cov(p, p) == sample_cov(s, s));
    }
}

TEST_CASE("exact_sum is correctly rounded") {
    std::vector<double> v{1e100, 1.0, -1e100, 1e-30};
    CHECK(exact_sum(v) == 1.0);
    std::vector<double> tiny(10, 0.1);
    CHECK(exact_sum(tiny) == 1.0);
}

TEST_CASE("solve_spd examples") {
    const Matrix b = testing::gaussian_matrix(3, 2, 4);
    CHECK(solve_spd(Matrix::Identity(3, 3), b) == b);

    Matrix a(2, 2);
    a << 2, 0, 0, 4;
    const Matrix x = solve_spd(a, Matrix::Ones(2, 1));
    CHECK(x(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(x(1, 0) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("solve_spd on a rank-one matrix uses the jitter ladder or reports the condition") {
    Matrix a(2, 2);
    a << 1, 1, 1, 1;
    // In the range of A: the jittered solve approaches the minimum-norm solution.
    Matrix b(2, 1);
    b << 2, 2;
    const SpdSolution sol = solve_spd_detailed(a, b);
    CHECK(sol.jitter > 0.0);
    CHECK((a * sol.solution - b).cwiseAbs().maxCoeff() <= 1e-8 * 2.0);
    // Brute-force pseudo-solve: x = A⁺b = (1, 1).
    CHECK(sol.solution(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(sol.solution(1, 0) == doctest::Approx(1.0).epsilon(1e-5));

    // Outside the range: no rung can meet the residual bound.
    Matrix c(2, 1);
    c << 1, -1;
    try {
        solve_spd(a, c);
        FAIL("expected a singular-covariance error");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("singular statistic covariance") != std::string::npos);
        CHECK(e.condition() > 1e12);
    }
}

TEST_CASE("solve_spd recovers random well-conditioned systems") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const std::size_t k = 1 + seed % 20;
        const Matrix g = testing::gaussian_matrix(k + 5, k, 100 + seed);
        const Matrix a = g.transpose() * g + Matrix::Identity(k, k);
        REQUIRE(symmetric_condition(a) < 1e6);
        const Matrix x0 = testing::gaussian_matrix(k, 3, 200 + seed);
        CHECK((solve_spd(a, a * x0) - x0).cwiseAbs().maxCoeff() < 1e-8);
    }
}

}
