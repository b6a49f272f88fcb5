#pragma once
// Scenario configs, the evaluator registry, runs and report emission.
#include "tub/constants.hpp"
#include "tub/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tub {

inline constexpr const char* kToolkitVersion = "0.3.0";

struct EvaluatorSpec {
    std::string name;
    json params = json::object();
};

struct Scenario {
    std::string name;
    std::string units = "natural";   // natural | lj_argon
    json model = json::object();      // defaults filled
    json probe = json::object();
    std::vector<double> beta;         // empty: single point without beta
    std::vector<EvaluatorSpec> evaluators;
    std::optional<std::uint64_t> seed;
};

struct EvaluatorInfo {
    std::string name;
    std::vector<std::string> models;   // model kinds it accepts
    std::string summary;
};

const std::vector<EvaluatorInfo>& evaluator_registry();
std::vector<std::string> evaluator_names();

// Throws ConfigError naming the JSON path of the first problem.
std::vector<Scenario> parse_config(const json& root);
std::vector<Scenario> load_config(const std::string& path);
// Config with defaults filled, as echoed by `validate`.
json echo_config(const std::vector<Scenario>& sc);

struct ScenarioResult {
    std::string name;
    std::vector<BoundReport> reports;
    double wall_seconds = 0.0;
};

struct RunManifest {
    std::string version = kToolkitVersion;
    std::string config_hash;
    std::vector<ScenarioResult> scenarios;   // ordered by name

    bool failed() const;
    std::size_t report_count() const;
};

// FNV-1a 64 over the canonical dump (sorted keys, no whitespace).
std::string config_hash(const json& root);

// One scenario: every grid point times every evaluator, one report each.
ScenarioResult run_scenario(const Scenario& sc);
RunManifest run(const std::vector<Scenario>& sc, int jobs, const std::string& hash = "");

std::string format_number(double v);   // shortest round-trip decimal
std::string to_csv(const RunManifest& m);
json to_json(const RunManifest& m);
RunManifest manifest_from_json(const json& j);
void emit(const RunManifest& m, const std::string& dir, const std::string& format);

} // namespace tub
