#pragma once

#include "sabc/experiment.hpp"
#include "sabc/models.hpp"
#include "sabc/semiauto.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sabc {

/// Validated run configuration. Every field carries its default after
/// parsing, so config_to_json() is the canonical, fully explicit form.
struct RunConfig {
    std::string model_name;
    nlohmann::json model_params;                 ///< canonical, defaults filled
    std::optional<nlohmann::json> prior;         ///< canonical per-coordinate override list

    std::size_t pilot_m = 10'000;
    double pilot_accept_fraction = 0.05;
    std::string pilot_statistics = "raw";
    double pilot_expand = 0.1;

    std::size_t construct_m = 10'000;

    std::size_t main_m = 100'000;
    double main_accept_fraction = 0.01;
    bool main_use_truncation = true;
    std::string main_kernel = "uniform";
    bool main_persist_batch = false;

    nlohmann::json basis;                        ///< canonical basis object
    double ridge_lambda = 0.0;
    nlohmann::json targets;                      ///< canonical target list

    bool regression_adjust = false;
    bool marginal_adjust = false;
    std::vector<std::string> transforms;

    std::optional<nlohmann::json> experiment;    ///< canonical plan object

    std::optional<std::uint64_t> seed;
    std::string output_dir;
};

/// Reads and validates a JSON config. Unknown keys, missing required keys and
/// out-of-range values raise ValidationError naming the dotted key path.
RunConfig parse_config(const std::filesystem::path& path);
/// The raw JSON document behind parse_config, before validation.
nlohmann::json read_config_document(const std::filesystem::path& path);
/// "name" or "name:key=value,key=value" into a model object {name, params}.
/// Values are JSON (numbers, [arrays]) or bare strings, e.g. gpd:xi_true=0.1,tau_grid=[0.5,0.99].
nlohmann::json parse_model_spec(const std::string& spec);
RunConfig parse_config_json(const nlohmann::json& doc);

nlohmann::json config_to_json(const RunConfig& config);

/// Hash of the canonical config (seed included, output_dir excluded).
std::string config_hash(const RunConfig& config);

ModelFixture build_fixture(const RunConfig& config);
PipelineSettings pipeline_settings(const RunConfig& config);
ExperimentPlan experiment_plan(const RunConfig& config);

std::vector<TargetFunctional> parse_targets(const nlohmann::json& targets);
BasisSpec parse_basis(const nlohmann::json& basis);
nlohmann::json basis_to_json(const BasisSpec& basis);

}  // namespace sabc
