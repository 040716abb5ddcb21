#pragma once

#include <carnot/expression.hpp>
#include <carnot/solver.hpp>

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace carnot {

inline constexpr int kReportSchemaVersion = 1;

/// Experiment kinds accepted in the "experiment" field.
std::vector<std::string> experiment_names();

/// Resolved experiment description; `section` holds the experiment-specific table.
struct ExperimentConfig {
    std::string name;
    std::string experiment;
    std::string group_label;
    GroupSpec group = abelian(1);
    std::string operator_name;
    std::map<std::string, double> operator_params;
    std::map<std::string, std::string> operator_choices;
    OperatorSpec op;
    GridGeometry grid;
    std::string boundary_text;
    Expression boundary;
    std::optional<Expression> reference;
    std::uint64_t seed = 1;
    SolveOptions solve;
    double eps_reg = -1.0;
    nlohmann::json section;
};

/// GroupSpec from {"step", "layer_dims", "constants": [[k, i, j, value], ...]} with 1-based indices.
GroupSpec group_from_json(const nlohmann::json& j);
nlohmann::json group_to_json(const GroupSpec& spec);

/// Throws ConfigError naming the offending key; relative group files resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// Canonical resolved configuration (defaults filled in, expressions pretty-printed).
nlohmann::json describe(const ExperimentConfig& cfg);

struct ExperimentOutcome {
    nlohmann::json report;
    bool passed = false;
};

/// Runs the experiment, writing report.json plus CSV and grid artifacts into out_dir when it is non-empty.
/// Timestamps and wall times live under report["metadata"] only.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

/// Report for a configuration that failed to load or run.
nlohmann::json error_report(const std::string& type, const std::string& message);

void write_report(const std::string& out_dir, const nlohmann::json& report);

}  // namespace carnot
