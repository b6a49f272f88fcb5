// report.cpp - BoundReport construction and JSON mapping
#include "tub/report.hpp"
#include "tub/errors.hpp"

#include <algorithm>
#include <cmath>

namespace tub {

std::string to_string(Status s) {
    switch (s) {
    case Status::satisfied: return "satisfied";
    case Status::violated: return "violated";
    case Status::inconclusive: return "inconclusive";
    case Status::informational: return "informational";
    case Status::error: return "error";
    }
    return "error";
}

Status status_from_string(const std::string& s) {
    if (s == "satisfied") return Status::satisfied;
    if (s == "violated") return Status::violated;
    if (s == "inconclusive") return Status::inconclusive;
    if (s == "informational") return Status::informational;
    if (s == "error") return Status::error;
    throw ConfigError("unknown status '" + s + "'");
}

double default_tolerance(double lhs, double rhs) {
    return 1e-9 * std::max({std::abs(lhs), std::abs(rhs), 1.0});
}

static bool finite_pair(double a, double b) { return std::isfinite(a) && std::isfinite(b); }

BoundReport make_report(std::string name, double lhs, double rhs, double tol) {
    BoundReport r;
    r.name = std::move(name);
    r.lhs = lhs;
    r.rhs = rhs;
    r.margin = lhs - rhs;
    if (!finite_pair(lhs, rhs)) {
        r.status = Status::error;
        r.metadata["error"] = "non-finite quantity";
        r.lhs = std::isfinite(lhs) ? lhs : 0.0;
        r.rhs = std::isfinite(rhs) ? rhs : 0.0;
        r.margin = r.lhs - r.rhs;
        return r;
    }
    r.tolerance = tol < 0 ? default_tolerance(lhs, rhs) : tol;
    r.satisfied = r.margin >= -r.tolerance;
    r.status = *r.satisfied ? Status::satisfied : Status::violated;
    return r;
}

BoundReport make_unasserted(std::string name, double lhs, double rhs, Status status) {
    BoundReport r;
    r.name = std::move(name);
    r.lhs = std::isfinite(lhs) ? lhs : 0.0;
    r.rhs = std::isfinite(rhs) ? rhs : 0.0;
    r.margin = r.lhs - r.rhs;
    r.status = status;
    if (!finite_pair(lhs, rhs)) r.metadata["nonfinite"] = true;
    return r;
}

BoundReport make_error(std::string name, const std::string& what) {
    BoundReport r;
    r.name = std::move(name);
    r.status = Status::error;
    r.metadata["error"] = what;
    return r;
}

BoundReport make_semiclassical(std::string name, double lhs, double rhs, bool in_regime) {
    BoundReport r = make_report(std::move(name), lhs, rhs, 0.0);
    r.metadata["regime"] = in_regime ? "semiclassical" : "outside-semiclassical";
    if (r.status == Status::violated && !in_regime) {
        r.status = Status::informational;
        r.satisfied.reset();
    }
    return r;
}

void to_json(json& j, const BoundReport& r) {
    j = json::object();
    j["name"] = r.name;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["margin"] = r.margin;
    j["satisfied"] = r.satisfied ? json(*r.satisfied) : json(nullptr);
    j["tolerance"] = r.tolerance;
    j["status"] = to_string(r.status);
    j["beta"] = r.beta ? json(*r.beta) : json(nullptr);
    j["metadata"] = r.metadata;
}

void from_json(const json& j, BoundReport& r) {
    r.name = j.at("name").get<std::string>();
    r.lhs = j.at("lhs").get<double>();
    r.rhs = j.at("rhs").get<double>();
    r.margin = j.at("margin").get<double>();
    r.tolerance = j.at("tolerance").get<double>();
    r.satisfied.reset();
    if (!j.at("satisfied").is_null()) r.satisfied = j.at("satisfied").get<bool>();
    r.status = status_from_string(j.at("status").get<std::string>());
    r.beta.reset();
    if (j.contains("beta") && !j.at("beta").is_null()) r.beta = j.at("beta").get<double>();
    r.metadata = j.at("metadata");
}

} // namespace tub
