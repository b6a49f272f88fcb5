// runner_emit.cpp - CSV / JSON manifest output
#include "tub/errors.hpp"
#include "tub/runner.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tub {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
    if (j.is_null()) return std::nan("");
    return j.get<double>();
}

} // namespace

std::string to_csv(const RunManifest& m) {
    std::ostringstream os;
    os << "scenario,bound,beta,lhs,rhs,margin,satisfied,status,metadata_json\n";
    for (const auto& s : m.scenarios)
        for (const auto& r : s.reports) {
            os << csv_quote(s.name) << ',' << csv_quote(r.name) << ',' << (r.beta ? format_number(*r.beta) : "") << ','
               << format_number(r.lhs) << ',' << format_number(r.rhs) << ',' << format_number(r.margin) << ','
               << (r.satisfied ? (*r.satisfied ? "true" : "false") : "") << ',' << to_string(r.status) << ','
               << csv_quote(r.metadata.dump(-1, ' ', false, json::error_handler_t::replace)) << '\n';
        }
    return os.str();
}

json to_json(const RunManifest& m) {
    json j;
    j["version"] = m.version;
    j["config_hash"] = m.config_hash;
    j["scenarios"] = json::array();
    for (const auto& s : m.scenarios) {
        json sj;
        sj["name"] = s.name;
        sj["wall_seconds"] = s.wall_seconds;
        sj["reports"] = json::array();
        for (const auto& r : s.reports) {
            json rj = r;
            rj["lhs"] = number_or_null(r.lhs);
            rj["rhs"] = number_or_null(r.rhs);
            rj["margin"] = number_or_null(r.margin);
            sj["reports"].push_back(std::move(rj));
        }
        j["scenarios"].push_back(std::move(sj));
    }
    return j;
}

RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.version = j.at("version").get<std::string>();
    m.config_hash = j.at("config_hash").get<std::string>();
    for (const auto& sj : j.at("scenarios")) {
        ScenarioResult s;
        s.name = sj.at("name").get<std::string>();
        s.wall_seconds = sj.value("wall_seconds", 0.0);
        for (const auto& rj : sj.at("reports")) {
            json fixed = rj;
            BoundReport r;
            for (const char* k : {"lhs", "rhs", "margin"}) fixed[k] = 0.0;
            r = fixed.get<BoundReport>();
            r.lhs = number_from(rj.at("lhs"));
            r.rhs = number_from(rj.at("rhs"));
            r.margin = number_from(rj.at("margin"));
            s.reports.push_back(std::move(r));
        }
        m.scenarios.push_back(std::move(s));
    }
    return m;
}

void emit(const RunManifest& m, const std::string& dir, const std::string& format) {
    if (format != "csv" && format != "json") throw ConfigError("format: valid csv, json");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    const auto path = std::filesystem::path(dir) / (format == "csv" ? "results.csv" : "results.json");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    if (format == "csv") out << to_csv(m);
    else out << to_json(m).dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

} // namespace tub
