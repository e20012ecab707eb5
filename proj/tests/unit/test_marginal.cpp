#include "doctest.h"
#include "support.hpp"

#include "sabc/empirical.hpp"
#include "sabc/error.hpp"
#include "sabc/marginal_adjust.hpp"

#include <algorithm>

using namespace sabc;

namespace {

WeightedPosterior uniform_post(const Matrix& thetas) {
    WeightedPosterior p;
    p.thetas = thetas;
    p.weights = Vector::Constant(thetas.rows(), 1.0 / thetas.rows());
    return p;
}

MarginalEstimate marginal(std::size_t i, std::vector<double> v) {
    MarginalEstimate m;
    m.coordinate = i;
    m.samples = Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
    return m;
}

}  // namespace

TEST_SUITE("marginal_adjust") {

TEST_CASE("hand rank bookkeeping") {
    Matrix j(3, 1);
    j << 3, 1, 2;
    const WeightedPosterior out = marginal_remap(uniform_post(j), {marginal(0, {10, 20, 30})});
    CHECK(out.thetas(0, 0) == 30);
    CHECK(out.thetas(1, 0) == 10);
    CHECK(out.thetas(2, 0) == 20);
    CHECK(out.provenance.stage == "marginal_adjust");
}

TEST_CASE("self remap is the identity") {
    const Matrix j = testing::gaussian_matrix(50, 2, 1);
    std::vector<double> col(j.col(1).data(), j.col(1).data() + 50);
    const WeightedPosterior out = marginal_remap(uniform_post(j), {marginal(1, col)});
    CHECK(out.thetas == j);
}

TEST_CASE("ranks, spearman matrix and margins after remap") {
    const Matrix g = testing::gaussian_matrix(300, 3, 2);
    Matrix j = g;
    j.col(1) = g.col(0) + 0.5 * g.col(1);
    const Matrix m0 = testing::gaussian_matrix(900, 1, 3).array().exp().matrix();
    const Matrix m2 = testing::gaussian_matrix(300, 1, 4) * 7.0;
    const std::vector<double> a(m0.data(), m0.data() + 900), b(m2.data(), m2.data() + 300);
    const WeightedPosterior out = marginal_remap(uniform_post(j), {marginal(0, a), marginal(2, b)});
    CHECK(rank_matrix(out.thetas) == rank_matrix(j));
    CHECK(spearman_matrix(out.thetas) == spearman_matrix(j));
    CHECK(out.thetas.col(1) == j.col(1));
    // Sorted remapped column equals the selected quantiles bitwise.
    std::vector<double> sorted_a = a, got(out.thetas.col(0).data(), out.thetas.col(0).data() + 300);
    std::sort(sorted_a.begin(), sorted_a.end());
    std::sort(got.begin(), got.end());
    CHECK(got == evenly_spaced_quantiles(sorted_a, 300));
}

TEST_CASE("ties in the joint column are broken by row index") {
    Matrix j(4, 1);
    j << 1, 0, 1, 0;
    const WeightedPosterior out = marginal_remap(uniform_post(j), {marginal(0, {5, 6, 7, 8})});
    CHECK(out.thetas(1, 0) == 5);
    CHECK(out.thetas(3, 0) == 6);
    CHECK(out.thetas(0, 0) == 7);
    CHECK(out.thetas(2, 0) == 8);
}

TEST_CASE("remap preconditions") {
    const Matrix j = testing::gaussian_matrix(5, 1, 5);
    WeightedPosterior w = uniform_post(j);
    w.weights << 0.5, 0.2, 0.1, 0.1, 0.1;
    CHECK_THROWS_WITH_AS(marginal_remap(w, {marginal(0, {1, 2, 3, 4, 5})}), doctest::Contains("resample joint first"),
                         ValidationError);
    CHECK_THROWS_AS(marginal_remap(uniform_post(j), {marginal(0, {1})}), ValidationError);
    CHECK_THROWS_AS(marginal_remap(uniform_post(j), {marginal(0, {1, 2, 3})}), ValidationError);
    CHECK_THROWS_AS(marginal_remap(uniform_post(j), {marginal(1, {1, 2, 3, 4, 5})}), ValidationError);
    CHECK_THROWS_AS(marginal_remap(uniform_post(j), {marginal(0, {1, 2, 3, 4, 5}), marginal(0, {1, 2, 3, 4, 5})}),
                    ValidationError);
}

TEST_CASE("systematic resampling is deterministic and follows the weights") {
    Matrix j(4, 1);
    j << 0, 1, 2, 3;
    WeightedPosterior w = uniform_post(j);
    w.weights << 0.5, 0.25, 0.25, 0.0;
    const WeightedPosterior a = systematic_resample(w, 1), b = systematic_resample(w, 1);
    CHECK(a.thetas == b.thetas);
    CHECK(a.has_uniform_weights());
    CHECK((a.thetas.array() == 0).count() == 2);
    CHECK((a.thetas.array() == 3).count() == 0);
}

TEST_CASE("type-7 quantiles") {
    const std::vector<double> s{1, 2, 3, 4};
    CHECK(type7_quantile(s, 0.0) == 1);
    CHECK(type7_quantile(s, 1.0) == 4);
    CHECK(type7_quantile(s, 0.5) == 2.5);
    CHECK(type7_quantile(s, 1.0 / 3.0) == doctest::Approx(2.0));
    CHECK(evenly_spaced_quantiles(s, 4) == s);
    CHECK(evenly_spaced_quantiles(s, 3) == std::vector<double>{1, 2.5, 4});
}

TEST_CASE("ks distance against an exact cdf") {
    const std::vector<double> x{0.25, 0.75};
    CHECK(ks_distance(x, [](double v) { return std::clamp(v, 0.0, 1.0); }) == doctest::Approx(0.25));
}

}
