// runner_config.cpp - config schema, defaults and the evaluator registry
#include "tub/errors.hpp"
#include "tub/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace tub {

const std::vector<EvaluatorInfo>& evaluator_registry() {
    static const std::vector<EvaluatorInfo> reg = {
        {"oscillator_closed_form", {"oscillator"}, "ED kinetic variance and Z against closed forms"},
        {"uncertainty_fuzz", {"none"}, "random (rho, A, B): Var A Var B >= |<[A,B]>|^2/4"},
        {"cauchy_schwarz_fuzz", {"none"}, "random (rho, A, B): |Tr rho A B|^2 <= Tr(rho A A+) Tr(rho B+ B)"},
        {"deformed_moment_fuzz", {"none"}, "random draws of the exact deformed second-moment bound"},
        {"central_rate_bound", {"xy_chain", "oscillator"}, "rate of a local observable vs local heat capacity"},
        {"local_variance_crosscheck", {"xy_chain"}, "Var(H~_i) by ED vs the S^y correlator route"},
        {"moment_rate_bound", {"xy_chain", "oscillator"}, "higher moments of dQ/dt"},
        {"autocorr_derivative_bound", {"xy_chain", "oscillator"}, "max |dG/dt| vs (2/hbar) sigma_H sqrt<Q^4>"},
        {"two_point_correlator_bound", {"xy_chain"}, "region rate vs 4 Var(H~_lambda)/hbar^2"},
        {"lyapunov_bound", {"xy_chain", "md"}, "replica divergence rate"},
        {"speed_displacement_bound", {"oscillator", "md"}, "mode velocity and displacement variance"},
        {"acceleration_force_bound", {"md"}, "<a^2> vs interaction-scale bounds"},
        {"force_rate_bound", {"md"}, "<(da/dt)^2>/Var(a) vs 2 z d (kT/hbar)^2"},
        {"equipartition_check", {"md"}, "<v^2> = kT/m within 2%"},
        {"gaussian_moment_check", {"md"}, "<v^4>/<v^2>^2 = 3 within 5%"},
        {"diffusion_lower_bound", {"md"}, "Green-Kubo D+ vs the minimal diffusion bound"},
        {"transport_lower_bound", {"md"}, "Green-Kubo gamma+ for diffusion, viscosities, conductivity"},
        {"pressure_fluctuation_check", {"md"}, "G_P(0) vs kB T^2 (dP/dT)^2/C_v (informational)"},
        {"gradient_bound", {"none"}, "spatial derivative ratios vs 4 m kT/hbar^2"},
        {"field_gradient_bound", {"none"}, "d-dimensional field gradient vs 8 pi d/lambda_T^2"},
        {"ioffe_regel_check", {"none"}, "windowed ballistic variance and k l >= sqrt(3)"},
        {"orthogonality_time_bound", {"none", "xy_chain", "oscillator"}, "first orthogonality time vs pi hbar/(2 sigma_H)"},
        {"thermalization_window_bound", {"xy_chain"}, "windowed averages approach the diagonal ensemble"},
        {"reflection_positivity_audit", {"ising", "decoupled_oscillators", "xy_chain"}, "covariances of local terms"},
        {"lowT_highT_scaling", {"none"}, "power-law exponent of sqrt(kB T^2 C_v)"},
        {"eth_offdiagonal_experiment", {"none"}, "random-phase rate^2 vs Hilbert dimension"},
        {"constants_check", {"none"}, "reference Planckian scales in SI"},
    };
    return reg;
}

std::vector<std::string> evaluator_names() {
    std::vector<std::string> out;
    for (const auto& e : evaluator_registry()) out.push_back(e.name);
    return out;
}

namespace {

const std::set<std::string> kModels = {"none", "oscillator", "xy_chain", "ising", "fermi_gas", "decoupled_oscillators",
                                       "md"};
const std::set<std::string> kProbes = {"canonical", "tilted", "filtered_pure", "replica_pair", "dephased"};

[[noreturn]] void fail(const std::string& path, const std::string& msg) { throw ConfigError(path + ": " + msg); }

const json& need(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) fail(path + "." + key, "required");
    return j.at(key);
}

void fill(json& j, const std::string& key, const json& def) {
    if (!j.contains(key)) j[key] = def;
}

void expect_number(const json& j, const std::string& key, const std::string& path, bool positive = false) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number()) fail(path + "." + key, "must be a number");
    if (positive && !(j.at(key).get<double>() > 0.0)) fail(path + "." + key, "must be positive");
}

void expect_int(const json& j, const std::string& key, const std::string& path, long lo) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number_integer()) fail(path + "." + key, "must be an integer");
    if (j.at(key).get<long>() < lo) fail(path + "." + key, "must be >= " + std::to_string(lo));
}

void expect_bool(const json& j, const std::string& key, const std::string& path) {
    if (j.contains(key) && !j.at(key).is_boolean()) fail(path + "." + key, "must be a boolean");
}

void expect_seed(const json& j, const std::string& key, const std::string& path) {
    if (!j.contains(key)) return;
    if (!j.at(key).is_number_unsigned() && !(j.at(key).is_number_integer() && j.at(key).get<long long>() >= 0))
        fail(path + "." + key, "seed must be a nonnegative integer");
}

void check_model(json& m, const std::string& path) {
    if (!m.is_object()) fail(path, "must be an object");
    const json& kind = need(m, "kind", path);
    if (!kind.is_string() || !kModels.count(kind.get<std::string>())) {
        std::string valid;
        for (const auto& k : kModels) valid += (valid.empty() ? "" : ", ") + k;
        fail(path + ".kind", "unknown model kind; valid: " + valid);
    }
    const std::string k = kind.get<std::string>();
    if (k == "oscillator") {
        fill(m, "omega", 1.0);
        fill(m, "mass", 1.0);
        fill(m, "n_max", 40);
        expect_number(m, "omega", path, true);
        expect_number(m, "mass", path, true);
        expect_int(m, "n_max", path, 2);
    } else if (k == "xy_chain") {
        fill(m, "N", 4);
        fill(m, "J", 1.0);
        fill(m, "periodic", true);
        expect_int(m, "N", path, 2);
        expect_number(m, "J", path);
        expect_bool(m, "periodic", path);
        if (m["N"].get<int>() > 12) fail(path + ".N", "dense chains are capped at N = 12");
    } else if (k == "ising") {
        fill(m, "Lx", 3);
        fill(m, "Ly", 3);
        fill(m, "J", 1.0);
        fill(m, "h", 0.0);
        fill(m, "periodic", true);
        expect_int(m, "Lx", path, 1);
        expect_int(m, "Ly", path, 1);
        expect_number(m, "J", path);
        expect_number(m, "h", path);
        if (m.contains("bonds")) {
            if (!m["bonds"].is_array()) fail(path + ".bonds", "must be an array of [i, j, J]");
            for (std::size_t b = 0; b < m["bonds"].size(); ++b) {
                const auto& e = m["bonds"][b];
                if (!e.is_array() || e.size() != 3) fail(path + ".bonds[" + std::to_string(b) + "]", "must be [i, j, J]");
            }
        }
    } else if (k == "fermi_gas") {
        fill(m, "m_eff", 1.0);
        fill(m, "mu", 1.0);
        fill(m, "dim", 3);
    } else if (k == "decoupled_oscillators") {
        fill(m, "omegas", json::array({1.0, 1.3, 1.7}));
        fill(m, "n_max", 5);
        if (!m["omegas"].is_array() || m["omegas"].empty()) fail(path + ".omegas", "must be a nonempty array");
        expect_int(m, "n_max", path, 1);
    } else if (k == "md") {
        fill(m, "N", 64);
        fill(m, "dim", 3);
        fill(m, "mass", 1.0);
        fill(m, "potential", "lennard_jones");
        fill(m, "dt", 0.005);
        fill(m, "equilibrate", 10000);
        fill(m, "steps", 100000);
        fill(m, "sample_every", 10);
        fill(m, "full_pair_local", false);
        expect_int(m, "N", path, 1);
        expect_int(m, "dim", path, 1);
        expect_number(m, "dt", path, true);
        expect_int(m, "equilibrate", path, 0);
        expect_int(m, "steps", path, 1);
        expect_int(m, "sample_every", path, 1);
        const std::string pot = m["potential"].get<std::string>();
        if (pot != "lennard_jones" && pot != "harmonic_lattice" && pot != "trap" && pot != "none")
            fail(path + ".potential", "valid: lennard_jones, harmonic_lattice, trap, none");
        if (!m.contains("box") && !m.contains("density")) m["density"] = 0.6;
        expect_number(m, "box", path, true);
        expect_number(m, "density", path, true);
        if (pot == "lennard_jones") {
            fill(m, "lj", json::object());
            fill(m["lj"], "epsilon", 1.0);
            fill(m["lj"], "sigma", 1.0);
            fill(m["lj"], "cutoff", 2.5);
        } else if (pot != "none") {
            fill(m, "harmonic", json::object());
            fill(m["harmonic"], "k", 1.0);
            fill(m["harmonic"], "a", 1.0);
        }
        if (m.contains("thermostat") && !m["thermostat"].is_null()) {
            json& t = m["thermostat"];
            fill(t, "gamma", 1.0);
            expect_number(t, "gamma", path + ".thermostat", true);
            if (!t.contains("seed")) fail(path + ".thermostat.seed", "required when a thermostat is present");
            expect_seed(t, "seed", path + ".thermostat");
        }
        fill(m, "start_seed", 1);
        expect_seed(m, "start_seed", path);
    }
}

void check_probe(json& p, const std::string& path) {
    if (!p.is_object()) fail(path, "must be an object");
    fill(p, "kind", "canonical");
    const std::string k = p["kind"].get<std::string>();
    if (!kProbes.count(k)) fail(path + ".kind", "unknown probe kind");
    if (k == "tilted") fill(p, "epsilon", 0.1);
    if (k == "replica_pair") fill(p, "delta", 0.1);
    if (k == "dephased") {
        fill(p, "s", 0.5);
        if (!p.contains("seed")) fail(path + ".seed", "required for a dephased probe");
    }
    if (k == "filtered_pure" && !p.contains("seed")) fail(path + ".seed", "required for a filtered_pure probe");
    expect_seed(p, "seed", path);
    expect_number(p, "epsilon", path);
}

const std::set<std::string> kSeeded = {"uncertainty_fuzz", "cauchy_schwarz_fuzz", "deformed_moment_fuzz",
                                       "eth_offdiagonal_experiment", "gradient_bound", "field_gradient_bound"};

} // namespace

std::vector<Scenario> parse_config(const json& root) {
    if (!root.is_object()) fail("$", "config must be a JSON object");
    const json& list = need(root, "scenarios", "$");
    if (!list.is_array()) fail("$.scenarios", "must be an array");
    std::vector<Scenario> out;
    std::set<std::string> names;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "$.scenarios[" + std::to_string(i) + "]";
        const json& s = list[i];
        if (!s.is_object()) fail(path, "must be an object");
        Scenario sc;
        const json& nm = need(s, "name", path);
        if (!nm.is_string() || nm.get<std::string>().empty()) fail(path + ".name", "must be a nonempty string");
        sc.name = nm.get<std::string>();
        if (!names.insert(sc.name).second) fail(path + ".name", "duplicate scenario name '" + sc.name + "'");
        sc.units = s.value("units", root.value("units", std::string("natural")));
        if (sc.units != "natural" && sc.units != "lj_argon") fail(path + ".units", "valid: natural, lj_argon");
        sc.model = s.value("model", json{{"kind", "none"}});
        check_model(sc.model, path + ".model");
        sc.probe = s.value("probe", json{{"kind", "canonical"}});
        check_probe(sc.probe, path + ".probe");
        if (s.contains("seed")) {
            expect_seed(s, "seed", path);
            sc.seed = s.at("seed").get<std::uint64_t>();
        }
        if (s.contains("grid")) {
            const json& g = s.at("grid");
            if (!g.is_object()) fail(path + ".grid", "must be an object");
            if (g.contains("beta") && g.contains("T")) fail(path + ".grid", "give either beta or T, not both");
            const std::string key = g.contains("beta") ? "beta" : "T";
            const json& arr = need(g, key, path + ".grid");
            if (!arr.is_array() || arr.empty()) fail(path + ".grid." + key, "must be a nonempty array");
            for (std::size_t k = 0; k < arr.size(); ++k) {
                if (!arr[k].is_number() || !(arr[k].get<double>() > 0.0))
                    fail(path + ".grid." + key + "[" + std::to_string(k) + "]", "must be a positive number");
                const double v = arr[k].get<double>();
                sc.beta.push_back(key == "beta" ? v : 1.0 / v);
            }
        }
        const std::string mkind = sc.model["kind"].get<std::string>();
        if ((mkind == "md" || mkind == "oscillator" || mkind == "xy_chain" || mkind == "ising" ||
             mkind == "decoupled_oscillators") &&
            sc.beta.empty())
            fail(path + ".grid", "a temperature grid is required for model '" + mkind + "'");
        if (mkind == "md" && !sc.model.contains("thermostat"))
            fail(path + ".model.thermostat", "required for MD scenarios (canonical sampling)");

        const json& evs = need(s, "evaluators", path);
        if (!evs.is_array()) fail(path + ".evaluators", "must be an array");
        for (std::size_t k = 0; k < evs.size(); ++k) {
            const std::string ep = path + ".evaluators[" + std::to_string(k) + "]";
            EvaluatorSpec es;
            if (evs[k].is_string()) {
                es.name = evs[k].get<std::string>();
            } else if (evs[k].is_object()) {
                es.name = need(evs[k], "name", ep).get<std::string>();
                es.params = evs[k].value("params", json::object());
                if (!es.params.is_object()) fail(ep + ".params", "must be an object");
            } else {
                fail(ep, "must be a name or {name, params}");
            }
            const auto& reg = evaluator_registry();
            auto it = std::find_if(reg.begin(), reg.end(), [&](const EvaluatorInfo& e) { return e.name == es.name; });
            if (it == reg.end()) {
                std::string valid;
                for (const auto& n : evaluator_names()) valid += (valid.empty() ? "" : ", ") + n;
                fail(ep + ".name", "unknown evaluator '" + es.name + "'; valid: " + valid);
            }
            if (std::find(it->models.begin(), it->models.end(), mkind) == it->models.end())
                fail(ep + ".name", "evaluator '" + es.name + "' does not accept model '" + mkind + "'");
            if (kSeeded.count(es.name) && !es.params.contains("seed") && !sc.seed)
                fail(ep + ".params.seed", "required (stochastic evaluator)");
            if (es.params.contains("seed")) expect_seed(es.params, "seed", ep + ".params");
            if (es.params.contains("probe")) check_probe(es.params["probe"], ep + ".params.probe");
            sc.evaluators.push_back(std::move(es));
        }
        out.push_back(std::move(sc));
    }
    return out;
}

std::vector<Scenario> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_config(root);
}

json echo_config(const std::vector<Scenario>& sc) {
    json out = json::object();
    out["scenarios"] = json::array();
    for (const auto& s : sc) {
        json j;
        j["name"] = s.name;
        j["units"] = s.units;
        j["model"] = s.model;
        j["probe"] = s.probe;
        if (!s.beta.empty()) j["grid"] = {{"beta", s.beta}};
        if (s.seed) j["seed"] = *s.seed;
        j["evaluators"] = json::array();
        for (const auto& e : s.evaluators) j["evaluators"].push_back({{"name", e.name}, {"params", e.params}});
        out["scenarios"].push_back(j);
    }
    return out;
}

std::string config_hash(const json& root) {
    // nlohmann::json (not ordered) keeps object keys sorted, which canonicalizes key order
    const std::string canon = nlohmann::json::parse(root.dump()).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : canon) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace tub
