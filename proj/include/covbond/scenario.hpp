#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "covbond/model_types.hpp"
#include "covbond/monte_carlo.hpp"
#include "covbond/one_asset.hpp"
#include "covbond/two_asset.hpp"

namespace covbond {

enum class ModelKind { TwoAssetsMargins, TwoAssetsIssuer, OneAssetAdjusted, NormalToy };

ModelKind model_kind_from_string(const std::string& name);
std::string to_string(ModelKind kind);

/// Sweep over one input axis: "rho", "c" (covered face, total debt held fixed
/// by adjusting s), or "lgd_cover" (cover EL held fixed, pd = el / lgd).
struct SweepSpec {
    std::string axis;
    std::vector<double> values;
};

/// One scenario (or a family of scenarios) as read from a JSON config file.
struct ScenarioConfig {
    ModelKind model = ModelKind::TwoAssetsMargins;
    DebtStructure debt;
    std::optional<RiskInputs> cover;
    std::optional<RiskInputs> other;
    std::optional<RiskInputs> issuer;
    std::optional<double> cover_el;  // cover expected loss when only that is known
    std::vector<double> rho_values{1.0};
    std::optional<SweepSpec> sweep;
};

ScenarioConfig parse_scenario_config(const nlohmann::json& j);

struct ScenarioOutcome {
    std::string axis;
    double axis_value;
    nlohmann::json params;
    std::optional<TwoAssetParams> two_asset;
    std::optional<OneAssetParams> one_asset;
    LossReport report;
};

/// Calibrate and evaluate the configured model over its sweep (a single
/// scenario when no sweep is given). Rejects the normal toy model, whose
/// expected losses are not defined.
std::vector<ScenarioOutcome> run_expected_losses(const ScenarioConfig& cfg,
                                                 const Tolerance& tol = {});

/// Calibration-only entry point (also handles the normal toy model): returns
/// fitted parameters plus round-trip residual diagnostics.
nlohmann::json calibrate_json(const ScenarioConfig& cfg, const Tolerance& tol = {});

nlohmann::json loss_report_json(const LossReport& rep);
nlohmann::json mc_comparison_json(const McLossReport& mc, const LossReport& closed_form);

/// Row/column table of percent values; cells may be absent (rendered as NA).
struct TableData {
    std::vector<std::vector<std::string>> header_rows;
    std::vector<std::string> row_labels;
    std::vector<std::vector<std::optional<double>>> body_percent;
};

TableData make_table1(const Tolerance& tol = {});
TableData make_table2(const Tolerance& tol = {});
TableData make_table3(const Tolerance& tol = {});
TableData make_table(int id, const Tolerance& tol = {});

/// CSV with a 3-decimal percent rendering, or 15 significant digits when
/// full_precision is set. Comma separated, '.' decimal point, LF endings.
std::string render_table_csv(const TableData& table, bool full_precision);

struct RegionSpec {
    double pd_min = 1e-4;
    double pd_max = 0.02;
    int pd_steps = 50;
    double lgd_min = 0.01;
    double lgd_max = 0.99;
    int lgd_steps = 50;
};

/// Feasibility grid of the comonotonic issuer calibration for one or more
/// cover parameter sets. With exactly two sets the columns are named
/// feasible_small_set / feasible_large_set (ordered by the attainable PD
/// range); otherwise feasible_set1, feasible_set2, ...
std::string region_csv(const DebtStructure& debt, const std::vector<RiskInputs>& cover_sets,
                       const RegionSpec& spec);

}  // namespace covbond
