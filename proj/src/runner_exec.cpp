// runner_exec.cpp - scenario runtime and evaluator dispatch
#include "tub/errors.hpp"
#include "tub/evaluators.hpp"
#include "tub/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <thread>

namespace tub {

namespace {

// ---- parameter access -------------------------------------------------------

double num(const json& p, const char* k, double def) {
    if (!p.contains(k)) return def;
    if (!p.at(k).is_number()) throw ConfigError(std::string("params.") + k + ": must be a number");
    return p.at(k).get<double>();
}

long integer(const json& p, const char* k, long def) {
    if (!p.contains(k)) return def;
    if (!p.at(k).is_number_integer()) throw ConfigError(std::string("params.") + k + ": must be an integer");
    return p.at(k).get<long>();
}

bool flag(const json& p, const char* k, bool def) {
    if (!p.contains(k)) return def;
    if (!p.at(k).is_boolean()) throw ConfigError(std::string("params.") + k + ": must be a boolean");
    return p.at(k).get<bool>();
}

std::string text(const json& p, const char* k, const std::string& def) {
    if (!p.contains(k)) return def;
    if (!p.at(k).is_string()) throw ConfigError(std::string("params.") + k + ": must be a string");
    return p.at(k).get<std::string>();
}

std::vector<double> numbers(const json& p, const char* k, std::vector<double> def) {
    if (!p.contains(k)) return def;
    if (!p.at(k).is_array()) throw ConfigError(std::string("params.") + k + ": must be an array");
    std::vector<double> out;
    for (const auto& v : p.at(k)) out.push_back(v.get<double>());
    return out;
}

// ---- runtime ----------------------------------------------------------------

struct MDRun {
    MDSystem sys;
    MDState end;
    MDTrajectory tr;
    MDStatistics st;
};

class Runtime {
public:
    explicit Runtime(const Scenario& s) : sc(s), kind(s.model.at("kind").get<std::string>()) {
        hbar = sc.units == "lj_argon" ? argon_units().hbar_reduced() : 1.0;
    }

    const Scenario& sc;
    std::string kind;
    double hbar = 1.0;

    ThermalContext ctx(std::optional<double> beta, const json& p) const {
        if (beta) return ThermalContext::from_beta(*beta, hbar, 1.0);
        return ThermalContext(num(p, "T", 1.0), hbar, 1.0);
    }

    std::uint64_t seed(const EvaluatorSpec& e) const {
        if (e.params.contains("seed")) return e.params.at("seed").get<std::uint64_t>();
        if (sc.seed) return *sc.seed;
        throw ConfigError("params.seed: required");
    }

    const OscillatorModel& oscillator() {
        if (!osc_) {
            OscillatorSpec sp;
            sp.omega = sc.model.at("omega").get<double>();
            sp.mass = sc.model.at("mass").get<double>();
            sp.n_max = sc.model.at("n_max").get<int>();
            sp.hbar = hbar;
            osc_ = build_oscillator(sp);
        }
        return *osc_;
    }

    const XYChain& chain() {
        if (!xy_) xy_.emplace(XYChainSpec{sc.model.at("N").get<int>(), sc.model.at("J").get<double>(),
                                          sc.model.at("periodic").get<bool>(), hbar});
        return *xy_;
    }

    const QuantumModel& quantum() {
        if (!qm_) {
            if (kind == "xy_chain") qm_ = quantum_model(chain());
            else if (kind == "oscillator") qm_ = quantum_model(oscillator());
            else throw ContractError("model '" + kind + "' has no dense Hamiltonian");
        }
        return *qm_;
    }

    DenseOperator tilt() {
        if (kind == "xy_chain") return xy_tilt_operator(chain());
        const auto& o = oscillator();
        return o.x.scaled(hbar * o.spec.omega / o.x0());
    }

    ProbeState probe(const json& params, const ThermalContext& c) {
        const json& pj = params.contains("probe") ? params.at("probe") : sc.probe;
        const std::string k = pj.value("kind", std::string("canonical"));
        const auto& m = quantum();
        if (k == "canonical") return canonical_probe(CanonicalEnsemble(m.eig, c));
        if (k == "tilted") return tilted_probe(m.H, tilt(), pj.value("epsilon", 0.1), c);
        if (k == "replica_pair") return replica_pair_probe(m.H, tilt(), pj.value("delta", 0.1), c);
        if (k == "dephased")
            return dephased_mixture_probe(CanonicalEnsemble(m.eig, c), pj.value("s", 0.5),
                                          pj.at("seed").get<std::uint64_t>());
        if (k == "filtered_pure") {
            CanonicalEnsemble e(m.eig, c);
            const double E = e.mean_energy(), s = std::sqrt(e.energy_variance());
            return filtered_pure_probe(m.eig, pj.value("e_lo", E - s), pj.value("e_hi", E + s),
                                       pj.at("seed").get<std::uint64_t>());
        }
        throw ConfigError("probe.kind: unknown '" + k + "'");
    }

    SiteObservable site(const std::string& obs, int i, SelectionMode mode) {
        const auto& m = quantum();
        if (kind == "xy_chain") {
            if (obs.size() != 2 || obs[0] != 'S') throw ConfigError("params.observable: use Sx, Sy or Sz");
            if (i < 0 || i >= chain().spec().N) throw ConfigError("params.site: out of range");
            return make_site(m, obs + "_" + std::to_string(i), chain().site(obs[1], i), mode);
        }
        const auto& o = oscillator();
        if (obs == "x") return make_site(m, "x", o.x, mode);
        if (obs == "p") return make_site(m, "p", o.p, mode);
        throw ConfigError("params.observable: use x or p for the oscillator");
    }

    std::vector<SiteObservable> sites(const json& p, const char* def_obs) {
        const std::string obs = text(p, "observable", def_obs);
        const auto mode = text(p, "selection", "minimal") == "augmented" ? SelectionMode::augmented : SelectionMode::minimal;
        std::vector<SiteObservable> out;
        if (kind == "xy_chain" && (!p.contains("sites") || p.at("sites") == "all")) {
            for (int i = 0; i < chain().spec().N; ++i) out.push_back(site(obs, i, mode));
        } else if (p.contains("sites")) {
            for (const auto& v : p.at("sites")) out.push_back(site(obs, v.get<int>(), mode));
        } else {
            out.push_back(site(obs, 0, mode));
        }
        return out;
    }

    MDSystem md_system(double T) const {
        const json& m = sc.model;
        MDSystem s;
        s.N = m.at("N").get<int>();
        s.dim = m.at("dim").get<int>();
        s.mass = m.at("mass").get<double>();
        s.dt = m.at("dt").get<double>();
        const std::string pot = m.at("potential").get<std::string>();
        s.potential = pot == "lennard_jones"      ? PotentialKind::lennard_jones
                      : pot == "harmonic_lattice" ? PotentialKind::harmonic_lattice
                      : pot == "trap"             ? PotentialKind::trap
                                                  : PotentialKind::none;
        if (m.contains("lj")) s.lj = {m["lj"].at("epsilon").get<double>(), m["lj"].at("sigma").get<double>(),
                                      m["lj"].at("cutoff").get<double>()};
        if (m.contains("harmonic")) s.harmonic = {m["harmonic"].at("k").get<double>(), m["harmonic"].at("a").get<double>()};
        if (m.contains("box")) {
            s.box = m.at("box").get<double>();
        } else if (s.potential == PotentialKind::harmonic_lattice) {
            const int side = static_cast<int>(std::lround(std::pow(s.N, 1.0 / s.dim)));
            s.box = side * s.harmonic.a;
        } else {
            s.box = std::pow(s.N / m.at("density").get<double>(), 1.0 / s.dim);
        }
        s.full_pair_local = m.at("full_pair_local").get<bool>();
        const json& t = m.at("thermostat");
        if (!t.is_null()) s.thermostat = LangevinParams{t.at("gamma").get<double>(), T, t.at("seed").get<std::uint64_t>()};
        s.blowup_T = T;
        s.validate();
        return s;
    }

    // Equilibrated production run at temperature T, cached per T.
    const MDRun& md(double T, long steps_override = 0) {
        const auto key = std::make_pair(T, steps_override);
        auto it = md_.find(key);
        if (it != md_.end()) return *it->second;
        auto run = std::make_shared<MDRun>();
        run->sys = md_system(T);
        MDEngine eng(run->sys);
        eng.lattice_start(T, sc.model.at("start_seed").get<std::uint64_t>());
        eng.run(sc.model.at("equilibrate").get<long>());
        const long steps = steps_override > 0 ? steps_override : sc.model.at("steps").get<long>();
        run->tr = eng.integrate(steps, sc.model.at("sample_every").get<int>());
        run->end = eng.state();
        run->st = local_statistics(run->tr, T);
        md_.emplace(key, run);
        return *run;
    }

private:
    std::optional<OscillatorModel> osc_;
    std::optional<XYChain> xy_;
    std::optional<QuantumModel> qm_;
    std::map<std::pair<double, long>, std::shared_ptr<MDRun>> md_;
};

using Beta = std::optional<double>;
using Fn = std::function<BoundReport(Runtime&, const EvaluatorSpec&, Beta)>;

double temperature(const Runtime& rt, Beta b, const json& p) { return rt.ctx(b, p).T; }

BoundReport fuzz_report(const std::string& name, const FuzzSummary& f) {
    BoundReport r = make_report(name, f.min_margin, 0.0, f.tolerance);
    if (f.violations > 0) {
        r.status = Status::violated;
        r.satisfied = false;
    }
    r.metadata["draws"] = f.draws;
    r.metadata["violations"] = f.violations;
    return r;
}

BoundReport pick(const std::vector<BoundReport>& reps, const std::string& name) {
    for (const auto& r : reps)
        if (r.name == name) return r;
    throw ConfigError("params.form: no report named '" + name + "' for this input");
}

const std::map<std::string, Fn>& dispatch() {
    static const std::map<std::string, Fn> table = {
        {"oscillator_closed_form",
         [](Runtime& rt, const EvaluatorSpec&, Beta b) {
             const auto& o = rt.oscillator();
             const double bx = *b * rt.hbar * o.spec.omega;
             const auto cf = oscillator_closed_form(o.spec, bx);
             BoundReport r = make_report("oscillator_closed_form", 1e-8, cf.var_rel_err, 0.0);
             if (cf.z_rel_err > 1e-10) {
                 r.status = Status::violated;
                 r.satisfied = false;
             }
             r.metadata["beta_hbar_omega"] = bx;
             r.metadata["z_rel_err"] = cf.z_rel_err;
             return r;
         }},
        {"uncertainty_fuzz",
         [](Runtime& rt, const EvaluatorSpec& e, Beta) {
             return fuzz_report("uncertainty_fuzz", uncertainty_fuzz(static_cast<int>(integer(e.params, "draws", 1000)),
                                                                     static_cast<int>(integer(e.params, "max_dim", 8)),
                                                                     rt.seed(e)));
         }},
        {"cauchy_schwarz_fuzz",
         [](Runtime& rt, const EvaluatorSpec& e, Beta) {
             return fuzz_report("cauchy_schwarz_fuzz",
                                cauchy_schwarz_fuzz(static_cast<int>(integer(e.params, "draws", 1000)),
                                                    static_cast<int>(integer(e.params, "max_dim", 8)), rt.seed(e)));
         }},
        {"deformed_moment_fuzz",
         [](Runtime& rt, const EvaluatorSpec& e, Beta) {
             return fuzz_report("deformed_moment_fuzz",
                                deformed_moment_fuzz(static_cast<int>(integer(e.params, "draws", 500)),
                                                     static_cast<int>(integer(e.params, "max_dim", 64)), rt.seed(e)));
         }},
        {"central_rate_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto sites = rt.sites(e.params, rt.kind == "xy_chain" ? "Sx" : "x");
             return central_rate_bound(rt.quantum(), rt.probe(e.params, c), sites, c);
         }},
        {"local_variance_crosscheck",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             CanonicalEnsemble ens(rt.quantum().eig, c);
             double worst = 0.0;
             for (int i = 0; i < rt.chain().spec().N; ++i) {
                 const auto s = rt.site("Sx", i, SelectionMode::minimal);
                 worst = std::max(worst, std::abs(thermal_variance(ens, s.sel.local()) -
                                                  xy_local_variance_from_correlators(rt.chain(), ens, i)));
             }
             return make_report("local_variance_crosscheck", 1e-10, worst, 0.0);
         }},
        {"moment_rate_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto s = rt.sites(e.params, rt.kind == "xy_chain" ? "Sx" : "x").front();
             const auto variant = moment_variant_from_string(text(e.params, "variant", "exact_deformed"));
             const int n = static_cast<int>(integer(e.params, "n", 2));
             if (flag(e.params, "use_probe", false)) {
                 const auto p = rt.probe(e.params, c);
                 return moment_rate_bound(rt.quantum(), s, c, n, variant, &p.rho);
             }
             return moment_rate_bound(rt.quantum(), s, c, n, variant);
         }},
        {"autocorr_derivative_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto s = rt.sites(e.params, rt.kind == "xy_chain" ? "Sx" : "x").front();
             CanonicalEnsemble ens(rt.quantum().eig, c);
             const double sh = std::sqrt(thermal_variance(ens, s.sel.local()));
             if (!(sh > 0.0)) throw DegenerateError("local Hamiltonian has zero thermal variance");
             const double dt = c.hbar / sh / num(e.params, "points_per_time", 32.0);
             const auto pts = static_cast<std::size_t>(integer(e.params, "points", 257));
             const bool sub = flag(e.params, "subtract_mean", false);
             const auto series = autocorrelation(ens, s.q, uniform_grid(dt * (pts - 1), pts), sub);
             return autocorr_derivative_bound(series, ens, s, sub);
         }},
        {"two_point_correlator_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             json p = e.params;
             if (!p.contains("sites")) p["sites"] = json::array({0, 1});
             return two_point_correlator_bound(rt.quantum(), rt.probe(e.params, c), rt.sites(p, "Sx"), c,
                                               num(e.params, "window", 0.0),
                                               static_cast<int>(integer(e.params, "points", 64)));
         }},
        {"lyapunov_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             if (rt.kind == "md") {
                 const auto& run = rt.md(c.T);
                 MDSystem sys = run.sys;
                 const auto sep = classical_replica_separation(sys, run.end, num(e.params, "delta", 1e-8),
                                                               integer(e.params, "steps", 3000),
                                                               static_cast<int>(integer(e.params, "sample_every", 5)),
                                                               rt.seed(e));
                 return lyapunov_bound_classical(sep, c);
             }
             const auto& m = rt.quantum();
             const auto pair = replica_pair_probe(m.H, rt.tilt(), num(e.params, "delta", 0.1), c);
             const auto grid = uniform_grid(num(e.params, "t_max", 4.0),
                                            static_cast<std::size_t>(integer(e.params, "points", 41)));
             return lyapunov_bound_quantum(m, pair, rt.sites(e.params, "Sx"), c, grid);
         }},
        {"speed_displacement_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const std::string form = text(e.params, "form", rt.kind == "md" ? "displacement" : "kinetic");
             std::optional<LatticeSafety> safety;
             if (e.params.contains("a") || e.params.contains("c_L"))
                 safety = LatticeSafety{num(e.params, "a", 1.0), num(e.params, "c_L", 0.1)};
             if (rt.kind == "md") {
                 std::optional<bool> eq;
                 if (e.params.contains("equipartition")) eq = flag(e.params, "equipartition", true);
                 const auto reps = speed_displacement_bound(rt.md(c.T).tr, eq, safety, c);
                 static const std::map<std::string, std::string> names = {
                     {"displacement", "displacement_variance"}, {"mode_velocity", "mode_velocity"},
                     {"mode_velocity_lindemann", "mode_velocity_lindemann"}, {"compact", "compact_coordinate"}};
                 auto it = names.find(form);
                 if (it == names.end()) throw ConfigError("params.form: unknown '" + form + "'");
                 return pick(reps, it->second);
             }
             if (!safety) throw ConfigError("params.a: lattice constant required for the oscillator");
             const auto reps = speed_displacement_bound(rt.oscillator(), rt.probe(e.params, c), *safety, c);
             static const std::map<std::string, std::string> names = {{"kinetic", "speed_mode_kinetic"},
                                                                      {"einstein", "speed_mode_einstein"},
                                                                      {"highT", "speed_mode_highT"},
                                                                      {"displacement", "displacement_variance"}};
             auto it = names.find(form);
             if (it == names.end()) throw ConfigError("params.form: unknown '" + form + "'");
             return pick(reps, it->second);
         }},
        {"acceleration_force_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const std::string mode = text(e.params, "mode", "variance");
             const InteractionMode im = mode == "variance"       ? InteractionMode::variance
                                        : mode == "bounded_norm" ? InteractionMode::bounded_norm
                                        : mode == "power_law"    ? InteractionMode::power_law
                                                                 : throw ConfigError("params.mode: unknown '" + mode + "'");
             std::optional<double> nv, C;
             if (e.params.contains("norm_V")) nv = num(e.params, "norm_V", 0.0);
             if (e.params.contains("C")) C = num(e.params, "C", 0.0);
             return acceleration_force_bound(rt.md(c.T).st, c, im, nv, C, flag(e.params, "equipartition", true));
         }},
        {"force_rate_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto& run = rt.md(c.T);
             MDSystem sys = run.sys;
             sys.thermostat.reset();
             MDEngine eng(sys);
             eng.set_state(run.end);
             RecordSpec rec;
             rec.positions = rec.velocities = rec.local = rec.transport = false;
             const auto tr = eng.integrate(integer(e.params, "steps", 2000), 1, rec);
             return force_rate_bound(force_rate_statistics(tr), run.st.z_mean, sys.dim, c,
                                     flag(e.params, "equipartition", true));
         }},
        {"equipartition_check",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto& st = rt.md(c.T).st;
             const double dev = std::abs(st.mass * st.v2.mean / c.kT() - 1.0);
             BoundReport r = make_report("equipartition", num(e.params, "tolerance", 0.02), dev, 0.0);
             r.metadata["v2"] = st.v2.mean;
             r.metadata["v2_err"] = st.v2.err;
             r.metadata["half_drift"] = st.half_drift;
             return r;
         }},
        {"gaussian_moment_check",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto& st = rt.md(c.T).st;
             BoundReport r = make_report("gaussian_moment", num(e.params, "tolerance", 0.05),
                                         std::abs(st.v4_ratio.mean / 3.0 - 1.0), 0.0);
             r.metadata["v4_ratio"] = st.v4_ratio.mean;
             r.metadata["v4_ratio_err"] = st.v4_ratio.err;
             return r;
         }},
        {"diffusion_lower_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto& run = rt.md(c.T);
             const auto lag = static_cast<std::size_t>(integer(e.params, "max_lag", 400));
             const auto ti = transport_inputs(run.tr, run.st, TransportKind::diffusion, lag);
             DiffusionInputs in = diffusion_inputs(run.st, flag(e.params, "use_variance", false));
             in.A_D = num(e.params, "A_D", 1.0);
             in.radius = num(e.params, "radius", 0.5);
             in.maximal_at_zero = ti.maximal_at_zero;
             BoundReport r = diffusion_lower_bound(ti.G, in, c);
             r.metadata["ratio"] = r.rhs > 0 ? json(r.lhs / r.rhs) : json(nullptr);
             r.metadata["hbar"] = c.hbar;
             return r;
         }},
        {"transport_lower_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto& run = rt.md(c.T);
             const auto kind = transport_kind_from_string(text(e.params, "kind", "diffusion"));
             const auto in = transport_inputs(run.tr, run.st, kind,
                                              static_cast<std::size_t>(integer(e.params, "max_lag", 400)));
             BoundReport r = transport_lower_bound(in, c);
             r.metadata["ratio"] = r.rhs > 0 ? json(r.lhs / r.rhs) : json(nullptr);
             return r;
         }},
        {"pressure_fluctuation_check",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const double T = temperature(rt, b, e.params);
             const double dT = num(e.params, "dT", 0.05);
             const long steps = integer(e.params, "steps", 0);
             const auto& lo = rt.md(T - dT, steps).st;
             const auto& hi = rt.md(T + dT, steps).st;
             const auto& mid = rt.md(T, steps).st;
             const auto chk = pressure_fluctuation_check(lo, mid, hi, dT);
             BoundReport r = make_unasserted("pressure_fluctuation", chk.G_P0, chk.thermodynamic, Status::informational);
             r.metadata["ratio"] = chk.ratio;
             r.metadata["within_25_percent"] = std::abs(chk.ratio - 1.0) <= 0.25;
             return r;
         }},
        {"gradient_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto s = gaussian_samples(static_cast<int>(integer(e.params, "d", 1)), num(e.params, "s", 1.0),
                                             static_cast<std::size_t>(integer(e.params, "samples", 100000)), rt.seed(e));
             ScalarFunction f;
             const std::string k = text(e.params, "function", "gaussian");
             f.kind = k == "constant" ? ScalarFunction::Kind::constant
                      : k == "cosine" ? ScalarFunction::Kind::cosine
                                      : ScalarFunction::Kind::gaussian;
             f.width = num(e.params, "width", 1.0);
             f.value = num(e.params, "value", 1.0);
             return gradient_bound(s, f, static_cast<int>(integer(e.params, "n", 0)), num(e.params, "mass", 1.0), c,
                                   flag(e.params, "equipartition", true));
         }},
        {"field_gradient_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto s = gaussian_samples(static_cast<int>(integer(e.params, "d", 3)), num(e.params, "s", 1.0),
                                             static_cast<std::size_t>(integer(e.params, "samples", 100000)), rt.seed(e));
             ScalarFunction f;
             f.width = num(e.params, "width", 1.0);
             return field_gradient_bound(s, f, num(e.params, "mass", 1.0), c, flag(e.params, "equipartition", true));
         }},
        {"ioffe_regel_check",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             if (text(e.params, "mode", "analytic") == "argon") {
                 const double T = num(e.params, "T_kelvin", 100.0), l = num(e.params, "l_mfp", 1e-9);
                 const ThermalContext c(T, si::hbar, si::kB);
                 const double m = argon_units().mass_kg;
                 BallisticParams p{std::sqrt(si::kB * T / m), l, m};
                 BoundReport r = ioffe_regel_check(l / p.speed, p, c);
                 r.metadata["T_kelvin"] = T;
                 return r;
             }
             const auto c = rt.ctx(b, e.params);
             BallisticParams p{num(e.params, "speed", 1.0), num(e.params, "l_mfp", 1.0), num(e.params, "mass", 1.0)};
             return ioffe_regel_check(num(e.params, "tau", 1.0), p, c);
         }},
        {"orthogonality_time_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const std::string mode = text(e.params, "mode", rt.kind == "none" ? "two_level" : "thermal");
             if (mode == "two_level") {
                 const double gap = num(e.params, "gap", 1.0);
                 Eigendecomposition h;
                 h.values = RVec(2);
                 h.values << -0.5 * gap, 0.5 * gap;
                 h.vectors = Mat::Identity(2, 2);
                 Vec psi(2);
                 psi << std::sqrt(0.5), std::sqrt(0.5);
                 BoundReport r = orthogonality_time_bound(h, psi, rt.hbar, num(e.params, "horizon", 0.0));
                 r.metadata["saturation_error"] = std::abs(r.lhs - r.rhs);
                 if (std::abs(r.lhs - r.rhs) > 1e-10) {
                     r.status = Status::violated;
                     r.satisfied = false;
                 }
                 return r;
             }
             if (mode == "random_states")
                 return fuzz_report("orthogonality_time_fuzz",
                                    orthogonality_fuzz(static_cast<int>(integer(e.params, "draws", 100)),
                                                       static_cast<int>(integer(e.params, "dim", 8)), rt.seed(e)));
             const auto c = rt.ctx(b, e.params);
             return orthogonality_time_bound(CanonicalEnsemble(rt.quantum().eig, c), num(e.params, "horizon", 0.0));
         }},
        {"thermalization_window_bound",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const auto s = rt.sites(e.params, "Sx").front();
             BoundReport r = thermalization_window_bound(rt.quantum(), rt.probe(e.params, c), s, c,
                                                         static_cast<int>(integer(e.params, "points_per_decade", 16)));
             // optional assertion on the approach at 50 hbar/sigma
             if (e.params.contains("max_deviation_at_50")) {
                 const double lim = num(e.params, "max_deviation_at_50", 0.05);
                 const double d0 = r.metadata["deviation_at_50_ref"].get<double>();
                 const auto& dd = r.metadata["deviation_at_50_ref_over_diag"];
                 const double d1 = dd.is_null() ? 0.0 : dd.get<double>();
                 const bool env = r.metadata["envelope_nonincreasing"].get<bool>();
                 const json meta = r.metadata;
                 r = make_report("thermalization_window", lim, std::max(d0, d1), 0.0);
                 r.metadata = meta;
                 if (!env) {
                     r.status = Status::violated;
                     r.satisfied = false;
                 }
             }
             return r;
         }},
        {"reflection_positivity_audit",
         [](Runtime& rt, const EvaluatorSpec& e, Beta b) {
             const auto c = rt.ctx(b, e.params);
             const json& m = rt.sc.model;
             if (rt.kind == "ising") {
                 IsingLatticeSpec sp;
                 sp.Lx = m.at("Lx").get<int>();
                 sp.Ly = m.at("Ly").get<int>();
                 sp.J = m.at("J").get<double>();
                 sp.h = m.at("h").get<double>();
                 sp.periodic = m.at("periodic").get<bool>();
                 if (m.contains("bonds"))
                     for (const auto& bd : m.at("bonds"))
                         sp.bonds.push_back({bd[0].get<int>(), bd[1].get<int>(), bd[2].get<double>()});
                 return reflection_positivity_audit(sp, c.beta());
             }
             if (rt.kind == "decoupled_oscillators") {
                 const auto omegas = m.at("omegas").get<std::vector<double>>();
                 const int d = m.at("n_max").get<int>() + 1;
                 std::vector<HamiltonianTerm> terms;
                 DenseOperator H = DenseOperator::zero(static_cast<Eigen::Index>(std::pow(d, omegas.size())));
                 for (std::size_t k = 0; k < omegas.size(); ++k) {
                     RVec lv(d);
                     for (int n = 0; n < d; ++n) lv(n) = rt.hbar * omegas[k] * (n + 0.5);
                     std::vector<DenseOperator> f(omegas.size(), DenseOperator::identity(d));
                     f[k] = DenseOperator::diagonal(lv);
                     const auto t = tensor_product(f);
                     terms.push_back({"mode" + std::to_string(k), DenseOperator(t.matrix(), true)});
                     H = H + terms.back().op;
                 }
                 CanonicalEnsemble ens(hermitian_eigh(DenseOperator(H.matrix(), true)), c);
                 return reflection_positivity_audit(terms, ens, true);
             }
             CanonicalEnsemble ens(rt.quantum().eig, c);
             return reflection_positivity_audit(rt.quantum().terms, ens, false);
         }},
        {"lowT_highT_scaling",
         [](Runtime&, const EvaluatorSpec& e, Beta) {
             const std::string fam = text(e.params, "family", "fermi_gas");
             const std::string reg = text(e.params, "regime", fam == "oscillator_kinetic" ? "high_T" : "low_T");
             const auto regime = reg == "high_T" ? ScalingRegime::high_T : ScalingRegime::low_T;
             std::vector<double> T = numbers(e.params, "T", {});
             if (T.empty()) {
                 const double lo = num(e.params, "T_min", 1e-3), hi = num(e.params, "T_max", 1e-2);
                 const int n = static_cast<int>(integer(e.params, "points", 11));
                 for (int k = 0; k < n; ++k) T.push_back(lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1)));
             }
             std::vector<double> y;
             if (fam == "fermi_gas") {
                 FermiGasSpec fs;
                 fs.mu = num(e.params, "mu", 1.0);
                 fs.m_eff = num(e.params, "m_eff", 1.0);
                 y = fermi_gas_sqrt_variance(fs, T);
             } else if (fam == "oscillator_kinetic" || fam == "oscillator_gapped") {
                 OscillatorSpec os;
                 os.omega = num(e.params, "omega", 1.0);
                 os.n_max = static_cast<int>(integer(e.params, "n_max", 40));
                 y = oscillator_sqrt_variance(os, T, fam == "oscillator_kinetic");
             } else {
                 throw ConfigError("params.family: valid fermi_gas, oscillator_kinetic, oscillator_gapped");
             }
             return lowT_highT_scaling(fam, T, y, regime);
         }},
        {"eth_offdiagonal_experiment",
         [](Runtime& rt, const EvaluatorSpec& e, Beta) {
             std::vector<int> sizes;
             for (double v : numbers(e.params, "sizes", {6, 8, 10})) sizes.push_back(static_cast<int>(v));
             return eth_offdiagonal_experiment(sizes, static_cast<int>(integer(e.params, "seeds", 32)), rt.seed(e),
                                               num(e.params, "J", 1.0));
         }},
        {"constants_check",
         [](Runtime&, const EvaluatorSpec& e, Beta) {
             const std::string q = text(e.params, "quantity", "planckian_time");
             double val = 0.0, ref = 0.0, tol = 0.0;
             if (q == "planckian_time") {
                 val = planckian_time_si(300.0);
                 ref = 2.5e-14;
                 tol = 0.02;
             } else if (q == "n_hbar_water") {
                 val = n_hbar_si(3.34e28);
                 ref = 3.5e-6;
                 tol = 0.03;
             } else if (q == "thermal_wavelength_O2") {
                 val = thermal_wavelength_si(31.998 * si::amu, 300.0);
                 ref = 1.8e-11;
                 tol = 0.05;
             } else {
                 throw ConfigError("params.quantity: valid planckian_time, n_hbar_water, thermal_wavelength_O2");
             }
             BoundReport r = make_report("constant_" + q, num(e.params, "tolerance", tol), std::abs(val / ref - 1.0), 0.0);
             r.metadata["value_si"] = val;
             r.metadata["reference_si"] = ref;
             return r;
         }},
    };
    return table;
}

} // namespace

ScenarioResult run_scenario(const Scenario& sc) {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioResult res;
    res.name = sc.name;
    Runtime rt(sc);
    std::vector<Beta> grid;
    for (double b : sc.beta) grid.push_back(b);
    if (grid.empty()) grid.push_back(std::nullopt);
    for (const auto& b : grid)
        for (const auto& e : sc.evaluators) {
            BoundReport r;
            try {
                const auto& table = dispatch();
                auto it = table.find(e.name);
                if (it == table.end()) throw ConfigError("evaluator '" + e.name + "' is not implemented");
                r = it->second(rt, e, b);
            } catch (const std::exception& ex) {
                r = make_error(e.name, ex.what());
            }
            if (!r.beta && b) r.beta = *b;
            r.metadata["evaluator"] = e.name;
            if (!e.params.empty()) r.metadata["params"] = e.params;
            res.reports.push_back(std::move(r));
        }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

bool RunManifest::failed() const {
    for (const auto& s : scenarios)
        for (const auto& r : s.reports)
            if (r.failed()) return true;
    return false;
}

std::size_t RunManifest::report_count() const {
    std::size_t n = 0;
    for (const auto& s : scenarios) n += s.reports.size();
    return n;
}

RunManifest run(const std::vector<Scenario>& sc, int jobs, const std::string& hash) {
    RunManifest m;
    m.config_hash = hash;
    std::vector<ScenarioResult> out(sc.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < sc.size(); i = next++) out[i] = run_scenario(sc[i]);
    };
    const int n = std::max(1, std::min<int>(jobs, static_cast<int>(sc.size())));
    std::vector<std::thread> pool;
    for (int k = 1; k < n; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    std::sort(out.begin(), out.end(), [](const ScenarioResult& a, const ScenarioResult& b) { return a.name < b.name; });
    m.scenarios = std::move(out);
    return m;
}

} // namespace tub
