#include "doctest.h"

#include "sabc/error.hpp"
#include "sabc/experiment.hpp"
#include "sabc/models.hpp"

using namespace sabc;

namespace {

PipelineSettings gpd_settings(const ModelFixture& fx) {
    PipelineSettings s;
    s.pilot_m = 1000;
    s.construct_m = 1000;
    s.main_m = 2000;
    s.main_fraction = 0.05;
    s.targets = fx.default_targets;
    s.seed = 17;
    return s;
}

ModelFixture small_gpd() {
    GpdParams p;
    p.grid_points = 60;
    p.tau_grid = {0.99, 0.5, 0.9};
    return gpd_fixture(p);
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("plan validation") {
    ExperimentPlan p;
    p.groups = {{0, 1}, {1, 2}};
    CHECK_THROWS_AS(p.validate(3), ValidationError);
    p.groups = {{0, 1}};
    CHECK_THROWS_AS(p.validate(3), ValidationError);
    p.groups = {{0, 2}, {1}};
    CHECK_NOTHROW(p.validate(3));
    CHECK(p.groups_for(2) == std::vector<std::vector<std::size_t>>{{0}, {1}});
    p.target_counts = {4};
    CHECK_THROWS_AS(p.validate(3), ValidationError);
}

TEST_CASE("bookkeeping and singleton equivalence") {
    const ModelFixture fx = small_gpd();
    ExperimentPlan plan;
    plan.strategies = {Strategy::joint, Strategy::separate};
    plan.target_counts = {1, 3};
    plan.replicates = 3;
    plan.seed = 5;
    const ExperimentReport r = run_experiment(plan, fx, gpd_settings(fx));
    CHECK(r.failures == 0);
    // joint: 3 reps × (1 + 3) targets; separate singletons: the same.
    CHECK(r.rows.size() == 3 * 4 * 2);

    std::size_t tracked_p1 = 0;
    for (const auto& row : r.rows) {
        CHECK(row.oracle.has_value());
        if (row.p_prime != 1 || row.strategy != Strategy::joint) continue;
        ++tracked_p1;
        for (const auto& other : r.rows) {
            if (other.strategy == Strategy::separate && other.p_prime == 1 && other.replicate == row.replicate &&
                other.target_index == row.target_index) {
                CHECK(other.estimate == row.estimate);
                CHECK(other.seed == row.seed);
            }
        }
    }
    CHECK(tracked_p1 == 3);
    CHECK(r.tracked_target == "q_0.99");
    CHECK(r.tracked.size() == 4);  // 2 counts × 2 strategies
    for (const auto& d : r.discrepancies)
        if (d.p_prime == 1) CHECK(d.mean_abs_difference == 0.0);
    CHECK(r.joint_error_nondecreasing.has_value());
    for (const auto& row : r.rows) {
        CHECK(row.design_condition >= 1.0);
        CHECK(row.summary_condition >= 1.0);
    }
}

TEST_CASE("experiment is deterministic") {
    const ModelFixture fx = small_gpd();
    ExperimentPlan plan;
    plan.target_counts = {2};
    plan.replicates = 2;
    plan.seed = 3;
    const ExperimentReport a = run_experiment(plan, fx, gpd_settings(fx)), b = run_experiment(plan, fx, gpd_settings(fx));
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) CHECK(a.rows[i].estimate == b.rows[i].estimate);
}

TEST_CASE("replicate failures are recorded, not fatal") {
    const ModelFixture fx = two_point_fixture(0.1);
    PipelineSettings s;
    s.pilot_m = 500;
    s.construct_m = 500;
    s.main_m = 500;
    s.basis = BasisSpec::polynomial(2);
    s.targets = {TargetFunctional::coordinate(0)};
    ExperimentPlan plan;
    plan.replicates = 2;
    const ExperimentReport r = run_experiment(plan, fx, s);
    CHECK(r.failures == 2);
    for (const auto& row : r.rows) {
        CHECK(row.failed);
        CHECK(row.error.find("rank deficient") != std::string::npos);
    }
}

}
