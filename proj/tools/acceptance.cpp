// acceptance - runs the reference suite and prints one PASS/FAIL line per criterion
#include "tub/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#ifndef TUB_REFERENCE_CONFIG
#define TUB_REFERENCE_CONFIG "configs/reference.json"
#endif

using tub::BoundReport;
using tub::RunManifest;
using tub::ScenarioResult;

namespace {

// pinned tolerances
constexpr double kOscVarRel = 1e-8;
constexpr double kOscZRel = 1e-10;
constexpr double kOscSeconds = 1.0;
constexpr double kFuzzMargin = -1e-10;
constexpr double kFuzzSeconds = 10.0;
constexpr double kCentralMargin = -1e-9;
constexpr double kCorrelatorAgree = 1e-10;
constexpr double kDiagonalDev = 0.05;
constexpr double kEquipartition = 0.02;
constexpr double kGaussMoment = 0.05;
constexpr double kMDSeconds = 300.0;
constexpr double kWindowVarRel = 1e-10;
constexpr double kSaturation = 1e-10;
constexpr double kQslMargin = -1e-9;
constexpr double kPlanckTol = 0.02, kWaterTol = 0.03, kLambdaTol = 0.05;
constexpr double kCovFloor = -1e-12;
constexpr double kDecoupledRel = 1e-9;
constexpr double kExpTol = 0.05;
constexpr double kEthTol = 0.3;

struct Check {
    bool ok = true;
    std::ostringstream why;
    void need(bool c, const std::string& msg) {
        if (!c) {
            if (!ok) why << "; ";
            ok = false;
            why << msg;
        }
    }
};

std::vector<const ScenarioResult*> prefixed(const RunManifest& m, const std::string& p) {
    std::vector<const ScenarioResult*> out;
    for (const auto& s : m.scenarios)
        if (s.name.rfind(p, 0) == 0) out.push_back(&s);
    return out;
}

std::vector<const BoundReport*> reports(const RunManifest& m, const std::string& p, const std::string& name) {
    std::vector<const BoundReport*> out;
    for (const auto* s : prefixed(m, p))
        for (const auto& r : s->reports)
            if (name.empty() || r.name == name) out.push_back(&r);
    return out;
}

double seconds(const RunManifest& m, const std::string& p) {
    double t = 0.0;
    for (const auto* s : prefixed(m, p)) t += s->wall_seconds;
    return t;
}

double meta(const BoundReport& r, const char* key) {
    if (!r.metadata.contains(key) || !r.metadata[key].is_number()) return std::nan("");
    return r.metadata[key].get<double>();
}

std::string fmt(double v) {
    char b[32];
    std::snprintf(b, sizeof b, "%.3g", v);
    return b;
}

Check c1(const RunManifest& m) {
    Check c;
    const auto rs = reports(m, "c01_", "oscillator_closed_form");
    c.need(rs.size() == 4, "expected 4 beta points, got " + std::to_string(rs.size()));
    for (const auto* r : rs) {
        c.need(r->status != tub::Status::error, "evaluator error");
        c.need(r->rhs <= kOscVarRel, "Var rel err " + fmt(r->rhs));
        c.need(meta(*r, "z_rel_err") <= kOscZRel, "Z rel err " + fmt(meta(*r, "z_rel_err")));
    }
    c.need(seconds(m, "c01_") < kOscSeconds, "runtime " + fmt(seconds(m, "c01_")) + " s");
    return c;
}

Check fuzz(const RunManifest& m, const std::string& p, const std::string& name, std::size_t draws, double floor) {
    Check c;
    const auto rs = reports(m, p, name);
    c.need(rs.size() == 1, name + " missing");
    for (const auto* r : rs) {
        c.need(meta(*r, "draws") == static_cast<double>(draws), name + " draws " + fmt(meta(*r, "draws")));
        c.need(meta(*r, "violations") == 0.0, name + " violations " + fmt(meta(*r, "violations")));
        c.need(r->lhs >= floor, name + " min margin " + fmt(r->lhs));
    }
    return c;
}

Check c2(const RunManifest& m) {
    Check a = fuzz(m, "c02_", "uncertainty_fuzz", 1000, kFuzzMargin);
    Check b = fuzz(m, "c02_", "cauchy_schwarz_fuzz", 1000, kFuzzMargin);
    a.need(b.ok, b.why.str());
    a.need(seconds(m, "c02_") < kFuzzSeconds, "runtime " + fmt(seconds(m, "c02_")) + " s");
    return a;
}

Check c3(const RunManifest& m) {
    Check c;
    const auto rs = reports(m, "c03_", "central_rate");
    c.need(rs.size() == 36, "expected 36 (N, eps, beta, Q) reports, got " + std::to_string(rs.size()));
    double worst = 1e300;
    for (const auto* r : rs) {
        c.need(r->status != tub::Status::error, "evaluator error");
        worst = std::min(worst, r->margin);
    }
    c.need(worst >= kCentralMargin, "worst margin " + fmt(worst));
    const auto xs = reports(m, "c03_", "local_variance_crosscheck");
    c.need(xs.size() == 18, "expected 18 cross-checks, got " + std::to_string(xs.size()));
    for (const auto* r : xs) c.need(r->rhs <= kCorrelatorAgree, "correlator route off by " + fmt(r->rhs));
    return c;
}

Check c4(const RunManifest& m) { return fuzz(m, "c04_", "deformed_moment_fuzz", 500, -1e300); }

Check c5(const RunManifest& m) {
    Check c;
    const auto rs = reports(m, "c05_", "thermalization_window");
    c.need(rs.size() == 1, "report missing");
    for (const auto* r : rs) {
        c.need(r->metadata.contains("deviation_at_50_ref"), "no deviation recorded");
        const double d0 = meta(*r, "deviation_at_50_ref");
        const double d1 = meta(*r, "deviation_at_50_ref_over_diag");
        c.need(d0 <= kDiagonalDev, "deviation " + fmt(d0));
        c.need(d1 <= kDiagonalDev, "deviation relative to diagonal " + fmt(d1));
        c.need(r->metadata.value("envelope_nonincreasing", false), "envelope not monotone");
    }
    return c;
}

Check c6(const RunManifest& m) {
    Check c;
    const auto eq = reports(m, "c06_", "equipartition");
    const auto g = reports(m, "c06_", "gaussian_moment");
    const auto d = reports(m, "c06_", "diffusion");
    c.need(eq.size() == 1 && g.size() == 1 && d.size() == 1, "MD reports missing or errored");
    for (const auto* r : eq) c.need(r->rhs <= kEquipartition, "<v^2> deviation " + fmt(r->rhs));
    for (const auto* r : g) c.need(r->rhs <= kGaussMoment, "<v^4>/<v^2>^2 deviation " + fmt(r->rhs));
    for (const auto* r : d) {
        const double ratio = meta(*r, "ratio");
        c.need(ratio > 1.0, "D+ / bound = " + fmt(ratio));
    }
    for (const auto* r : reports(m, "c06_", ""))
        if (r->status == tub::Status::error) c.need(false, r->name + ": " + r->metadata.value("error", std::string()));
    c.need(seconds(m, "c06_") < kMDSeconds, "runtime " + fmt(seconds(m, "c06_")) + " s");
    return c;
}

Check c7(const RunManifest& m) {
    Check c;
    const auto rs = reports(m, "c07_", "ioffe_regel");
    c.need(rs.size() == 2, "expected analytic and argon reports");
    for (const auto* r : rs) {
        c.need(meta(*r, "variance_rel_error") <= kWindowVarRel, "window variance rel err " + fmt(meta(*r, "variance_rel_error")));
        c.need(r->lhs >= std::sqrt(3.0), "k l = " + fmt(r->lhs));
    }
    return c;
}

Check c8(const RunManifest& m) {
    Check c;
    const auto sat = reports(m, "c08_", "orthogonality_time");
    c.need(sat.size() == 1, "two-level report missing");
    for (const auto* r : sat) c.need(meta(*r, "saturation_error") <= kSaturation, "saturation error " + fmt(meta(*r, "saturation_error")));
    Check f = fuzz(m, "c08_", "orthogonality_time_fuzz", 100, kQslMargin);
    c.need(f.ok, f.why.str());
    return c;
}

Check c9(const RunManifest& m) {
    Check c;
    const std::vector<std::pair<std::string, double>> want = {{"constant_planckian_time", kPlanckTol},
                                                              {"constant_n_hbar_water", kWaterTol},
                                                              {"constant_thermal_wavelength_O2", kLambdaTol}};
    for (const auto& [name, tol] : want) {
        const auto rs = reports(m, "c09_", name);
        c.need(rs.size() == 1, name + " missing");
        for (const auto* r : rs) c.need(r->rhs <= tol, name + " rel err " + fmt(r->rhs));
    }
    return c;
}

Check c10(const RunManifest& m) {
    Check c;
    const auto is = reports(m, "c10_rp_ising", "reflection_positivity");
    c.need(is.size() == 3, "expected 3 Ising temperatures");
    for (const auto* r : is) {
        c.need(meta(*r, "min_covariance") >= kCovFloor, "covariance " + fmt(meta(*r, "min_covariance")));
        c.need(r->lhs >= r->rhs, "Var(H) < sum of term variances");
    }
    const auto dc = reports(m, "c10_rp_decoupled", "reflection_positivity");
    c.need(!dc.empty(), "decoupled family missing");
    for (const auto* r : dc)
        c.need(std::abs(r->lhs - r->rhs) <= kDecoupledRel * std::max(1.0, std::abs(r->lhs)),
               "decoupled gap " + fmt(r->lhs - r->rhs));
    return c;
}

Check c11(const RunManifest& m) {
    Check c;
    bool fermi = false, kin = false;
    for (const auto* r : reports(m, "c11_", "")) {
        const std::string fam = r->metadata.value("family", std::string());
        const double e = meta(*r, "exponent");
        if (fam == "fermi_gas") {
            fermi = true;
            c.need(std::abs(e - 1.5) <= kExpTol, "Fermi exponent " + fmt(e));
        } else if (fam == "oscillator_kinetic") {
            kin = true;
            c.need(std::abs(e - 1.0) <= kExpTol, "kinetic exponent " + fmt(e));
        }
    }
    c.need(fermi && kin, "scaling reports missing");
    return c;
}

Check c12(const RunManifest& m) {
    Check c;
    const auto rs = reports(m, "c12_", "eth_offdiagonal");
    c.need(rs.size() == 1, "ETH report missing");
    for (const auto* r : rs) {
        const double s = meta(*r, "slope");
        c.need(std::abs(s + 1.0) <= kEthTol, "slope " + fmt(s));
    }
    return c;
}

} // namespace

int main(int argc, char** argv) {
    const std::string path = argc > 1 ? argv[1] : TUB_REFERENCE_CONFIG;
    std::ifstream in(path);
    if (!in) {
        std::cerr << "cannot open " << path << '\n';
        return 2;
    }
    const auto root = tub::json::parse(in);
    const auto sc = tub::parse_config(root);
    const int jobs = static_cast<int>(std::max(2u, std::thread::hardware_concurrency()));
    const auto m = tub::run(sc, jobs, tub::config_hash(root));

    const std::vector<std::pair<std::string, std::function<Check(const RunManifest&)>>> crit = {
        {"oscillator closed forms", c1},       {"uncertainty fuzzing", c2},
        {"central bound on XY chains", c3},    {"exact higher-moment bound", c4},
        {"diagonal-ensemble convergence", c5}, {"MD statistics", c6},
        {"Ioffe-Regel", c7},                   {"Mandelshtam-Tamm", c8},
        {"constants", c9},                     {"reflection positivity", c10},
        {"scaling fits", c11},                 {"ETH experiment", c12},
    };
    int failed = 0;
    for (std::size_t i = 0; i < crit.size(); ++i) {
        const Check c = crit[i].second(m);
        failed += !c.ok;
        std::cout << (c.ok ? "PASS" : "FAIL") << "  " << i + 1 << ". " << crit[i].first;
        if (!c.ok) std::cout << "  (" << c.why.str() << ")";
        std::cout << '\n';
    }

    // second run, single worker: CSV must match byte for byte
    const auto m2 = tub::run(sc, 1, tub::config_hash(root));
    const bool same = tub::to_csv(m) == tub::to_csv(m2);
    failed += !same;
    std::cout << (same ? "PASS" : "FAIL") << "  13. determinism";
    if (!same) std::cout << "  (CSV differs between runs)";
    std::cout << '\n';

    std::size_t bad = 0;
    for (const auto& s : m.scenarios)
        for (const auto& r : s.reports)
            if (r.failed()) {
                ++bad;
                std::cerr << "failed report: " << s.name << " / " << r.name << '\n';
            }
    std::cout << m.report_count() << " reports, " << bad << " failed, criteria failed: " << failed << '\n';
    return failed || bad ? 1 : 0;
}
