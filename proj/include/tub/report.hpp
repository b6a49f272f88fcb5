#pragma once
// BoundReport: the universal evaluator output.
#include <json.hpp>

#include <optional>
#include <string>

namespace tub {

using json = nlohmann::ordered_json;

enum class Status { satisfied, violated, inconclusive, informational, error };

std::string to_string(Status s);
Status status_from_string(const std::string& s);

struct BoundReport {
    std::string name;
    double lhs = 0.0;        // bound side (the side that should be larger)
    double rhs = 0.0;        // constrained side
    double margin = 0.0;     // lhs - rhs
    double tolerance = 0.0;
    std::optional<bool> satisfied;   // empty when not asserted
    Status status = Status::informational;
    std::optional<double> beta;
    json metadata = json::object();

    // Only satisfied/violated/error reports can fail a run.
    bool assertable() const { return status == Status::satisfied || status == Status::violated || status == Status::error; }
    bool failed() const { return status == Status::violated || status == Status::error; }
};

double default_tolerance(double lhs, double rhs);

// Asserted comparison: lhs >= rhs - tol. Negative tol selects the default.
BoundReport make_report(std::string name, double lhs, double rhs, double tol = -1.0);
// Unasserted: records both sides with the given status (informational/inconclusive).
BoundReport make_unasserted(std::string name, double lhs, double rhs, Status status);
BoundReport make_error(std::string name, const std::string& what);

// Semi-classical comparison: zero tolerance; outside its regime a miss becomes
// informational with a regime flag instead of a failure.
BoundReport make_semiclassical(std::string name, double lhs, double rhs, bool in_regime);

void to_json(json& j, const BoundReport& r);
void from_json(const json& j, BoundReport& r);

} // namespace tub
