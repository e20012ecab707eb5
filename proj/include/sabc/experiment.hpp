#pragma once

#include "sabc/models.hpp"
#include "sabc/semiauto.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sabc {

enum class Strategy { joint, separate };

std::string strategy_name(Strategy s);

/// Replicated comparison of summary-construction strategies.
///
/// joint: one regression and one ABC run over all targets of a sweep point.
/// separate: one pipeline per group of targets. Groups partition the full
/// target list; empty means singletons. Both strategies use the same
/// per-replicate seed, so a singleton group reproduces the matching p′ = 1
/// joint run exactly.
struct ExperimentPlan {
    std::vector<Strategy> strategies{Strategy::joint};
    std::vector<std::vector<std::size_t>> groups;
    std::vector<std::size_t> target_counts;  ///< p′ sweep (first p′ targets); empty = all
    std::size_t replicates = 20;
    std::size_t tracked_target = 0;          ///< target reported in the error-vs-p′ table
    std::uint64_t seed = 0;

    void validate(std::size_t n_targets) const;
    /// Groups restricted to the first p′ targets, empty groups dropped.
    std::vector<std::vector<std::size_t>> groups_for(std::size_t p_prime) const;
};

std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t replicate);

struct ExperimentRow {
    std::size_t p_prime = 0;
    Strategy strategy = Strategy::joint;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    std::size_t group = 0;
    std::string target;
    std::size_t target_index = 0;
    double estimate = 0.0;
    std::optional<double> oracle;
    std::optional<double> abs_error;
    std::size_t summary_dim = 0;
    std::size_t accepted = 0;
    double design_condition = 0.0;   ///< conditioning of F(s) in the construction fit
    double summary_condition = 0.0;  ///< conditioning of the constructed summaries
    bool failed = false;
    std::string error;
};

struct ErrorAggregate {
    std::size_t p_prime = 0;
    Strategy strategy = Strategy::joint;
    std::string target;  ///< empty for the all-target aggregate
    std::size_t count = 0;
    double mean_error = 0.0;
    double median_error = 0.0;
    double median_summary_condition = 0.0;
    double median_design_condition = 0.0;
    std::size_t failures = 0;
};

struct Discrepancy {
    std::size_t p_prime = 0;
    std::string target;
    std::size_t count = 0;
    double mean_abs_difference = 0.0;  ///< |joint − separate| estimate
};

struct ExperimentReport {
    std::vector<ExperimentRow> rows;
    std::vector<ErrorAggregate> per_target;
    std::vector<ErrorAggregate> per_p_prime;
    std::vector<ErrorAggregate> tracked;  ///< error-vs-p′ for the tracked target
    std::vector<Discrepancy> discrepancies;
    std::string tracked_target;
    /// Median tracked-target error is non-decreasing in p′ for the joint
    /// strategy (directional outcome, not a pass/fail).
    std::optional<bool> joint_error_nondecreasing;
    std::size_t failures = 0;
};

/// Runs every (p′, strategy, replicate[, group]) unit in parallel; each unit
/// is a deterministic function of its seed. Failures are recorded in the rows.
ExperimentReport run_experiment(const ExperimentPlan& plan, const ModelFixture& fixture,
                                const PipelineSettings& settings);

}  // namespace sabc
