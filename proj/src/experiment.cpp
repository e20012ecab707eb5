#include "sabc/experiment.hpp"

#include "sabc/error.hpp"
#include "sabc/parallel.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace sabc {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

struct Unit {
    std::size_t p_prime;
    Strategy strategy;
    std::size_t replicate;
    std::size_t group;
    std::vector<std::size_t> target_indices;
};

}  // namespace

std::string strategy_name(Strategy s) { return s == Strategy::joint ? "joint" : "separate"; }

void ExperimentPlan::validate(std::size_t n_targets) const {
    if (strategies.empty()) throw ValidationError("experiment.strategies must be nonempty");
    if (replicates < 1) throw ValidationError("experiment.replicates must be >= 1");
    for (auto c : target_counts) {
        if (c < 1 || c > n_targets) {
            throw ValidationError("experiment.target_counts: " + std::to_string(c) + " is outside 1.." +
                                  std::to_string(n_targets));
        }
    }
    if (tracked_target >= n_targets) throw ValidationError("experiment.tracked_target out of range");
    if (!groups.empty()) {
        std::vector<int> seen(n_targets, 0);
        for (const auto& g : groups) {
            if (g.empty()) throw ValidationError("experiment.groups: empty group");
            for (auto t : g) {
                if (t >= n_targets) throw ValidationError("experiment.groups: target index " + std::to_string(t) + " out of range");
                ++seen[t];
            }
        }
        for (std::size_t t = 0; t < n_targets; ++t) {
            if (seen[t] != 1) {
                throw ValidationError("experiment.groups must partition the targets exactly (target " +
                                      std::to_string(t) + " appears " + std::to_string(seen[t]) + " times)");
            }
        }
    }
}

std::vector<std::vector<std::size_t>> ExperimentPlan::groups_for(std::size_t p_prime) const {
    std::vector<std::vector<std::size_t>> out;
    if (groups.empty()) {
        for (std::size_t t = 0; t < p_prime; ++t) out.push_back({t});
        return out;
    }
    for (const auto& g : groups) {
        std::vector<std::size_t> kept;
        for (auto t : g) {
            if (t < p_prime) kept.push_back(t);
        }
        if (!kept.empty()) out.push_back(std::move(kept));
    }
    return out;
}

std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t replicate) {
    return derive_seed(base_seed, replicate, stream_domain::kReplicate);
}

ExperimentReport run_experiment(const ExperimentPlan& plan, const ModelFixture& fixture,
                                const PipelineSettings& settings) {
    const std::size_t n_targets = settings.targets.size();
    plan.validate(n_targets);
    std::vector<std::size_t> counts = plan.target_counts;
    if (counts.empty()) counts.push_back(n_targets);

    std::vector<std::optional<double>> oracle(n_targets);
    for (std::size_t t = 0; t < n_targets; ++t) oracle[t] = fixture.oracle_mean(settings.targets[t]);

    std::vector<Unit> units;
    for (auto p_prime : counts) {
        for (auto strategy : plan.strategies) {
            for (std::size_t r = 0; r < plan.replicates; ++r) {
                if (strategy == Strategy::joint) {
                    std::vector<std::size_t> all(p_prime);
                    for (std::size_t t = 0; t < p_prime; ++t) all[t] = t;
                    units.push_back({p_prime, strategy, r, 0, std::move(all)});
                } else {
                    const auto groups = plan.groups_for(p_prime);
                    for (std::size_t g = 0; g < groups.size(); ++g) units.push_back({p_prime, strategy, r, g, groups[g]});
                }
            }
        }
    }

    std::vector<std::vector<ExperimentRow>> unit_rows(units.size());
    parallel_for(units.size(), [&](std::size_t u) {
        const Unit& unit = units[u];
        PipelineSettings s = settings;
        s.seed = replicate_seed(plan.seed, unit.replicate);
        s.targets.clear();
        for (auto t : unit.target_indices) s.targets.push_back(settings.targets[t]);

        auto base_row = [&](std::size_t k) {
            ExperimentRow row;
            row.p_prime = unit.p_prime;
            row.strategy = unit.strategy;
            row.replicate = unit.replicate;
            row.seed = s.seed;
            row.group = unit.group;
            row.target_index = unit.target_indices[k];
            row.target = settings.targets[row.target_index].name;
            row.oracle = oracle[row.target_index];
            row.summary_dim = unit.target_indices.size();
            return row;
        };

        try {
            const SemiautoResult res = run_semiauto(fixture, s);
            const Matrix constructed = project_all(res.construct.projector, res.construct.batch.stats);
            const double summary_condition = condition_diagnostics(constructed).condition_number;
            for (std::size_t k = 0; k < unit.target_indices.size(); ++k) {
                ExperimentRow row = base_row(k);
                row.estimate = res.infer.estimates[k].estimate;
                if (row.oracle) row.abs_error = std::abs(row.estimate - *row.oracle);
                row.accepted = res.infer.final_posterior().size();
                row.design_condition = res.construct.projector.condition_number;
                row.summary_condition = summary_condition;
                unit_rows[u].push_back(std::move(row));
            }
        } catch (const Error& e) {
            for (std::size_t k = 0; k < unit.target_indices.size(); ++k) {
                ExperimentRow row = base_row(k);
                row.failed = true;
                row.error = e.what();
                unit_rows[u].push_back(std::move(row));
            }
        }
    });

    ExperimentReport report;
    for (auto& rows : unit_rows) {
        for (auto& row : rows) report.rows.push_back(std::move(row));
    }
    report.tracked_target = settings.targets[plan.tracked_target].name;

    // Aggregation keyed on (p′, strategy order, target index).
    std::map<std::tuple<std::size_t, int, std::size_t>, std::vector<const ExperimentRow*>> by_target;
    std::map<std::pair<std::size_t, int>, std::vector<const ExperimentRow*>> by_p;
    for (const auto& row : report.rows) {
        by_target[{row.p_prime, static_cast<int>(row.strategy), row.target_index}].push_back(&row);
        by_p[{row.p_prime, static_cast<int>(row.strategy)}].push_back(&row);
        if (row.failed) ++report.failures;
    }

    auto aggregate = [](const std::vector<const ExperimentRow*>& rows) {
        ErrorAggregate agg;
        std::vector<double> errors, summary_cond, design_cond;
        for (const auto* r : rows) {
            if (r->failed) {
                ++agg.failures;
                continue;
            }
            if (r->abs_error) errors.push_back(*r->abs_error);
            summary_cond.push_back(r->summary_condition);
            design_cond.push_back(r->design_condition);
        }
        agg.count = errors.size();
        agg.mean_error = mean(errors);
        agg.median_error = median(errors);
        agg.median_summary_condition = median(summary_cond);
        agg.median_design_condition = median(design_cond);
        return agg;
    };

    for (const auto& [key, rows] : by_target) {
        ErrorAggregate agg = aggregate(rows);
        agg.p_prime = std::get<0>(key);
        agg.strategy = static_cast<Strategy>(std::get<1>(key));
        agg.target = settings.targets[std::get<2>(key)].name;
        if (std::get<2>(key) == plan.tracked_target) report.tracked.push_back(agg);
        report.per_target.push_back(std::move(agg));
    }
    for (const auto& [key, rows] : by_p) {
        ErrorAggregate agg = aggregate(rows);
        agg.p_prime = key.first;
        agg.strategy = static_cast<Strategy>(key.second);
        report.per_p_prime.push_back(std::move(agg));
    }

    std::vector<double> joint_tracked;
    for (const auto& agg : report.tracked) {
        if (agg.strategy == Strategy::joint && agg.count > 0) joint_tracked.push_back(agg.median_error);
    }
    if (joint_tracked.size() >= 2) {
        report.joint_error_nondecreasing = std::is_sorted(joint_tracked.begin(), joint_tracked.end());
    }

    // Cross-run discrepancy between strategies for shared targets.
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::pair<const ExperimentRow*, const ExperimentRow*>> pairs;
    for (const auto& row : report.rows) {
        if (row.failed) continue;
        auto& slot = pairs[{row.p_prime, row.target_index, row.replicate}];
        (row.strategy == Strategy::joint ? slot.first : slot.second) = &row;
    }
    std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> diffs;
    for (const auto& [key, pr] : pairs) {
        if (pr.first && pr.second) {
            diffs[{std::get<0>(key), std::get<1>(key)}].push_back(std::abs(pr.first->estimate - pr.second->estimate));
        }
    }
    for (const auto& [key, values] : diffs) {
        report.discrepancies.push_back({key.first, settings.targets[key.second].name, values.size(), mean(values)});
    }
    return report;
}

}  // namespace sabc
