// eval_classical.cpp - speed, MD-fed, gradient and scaling evaluators
#include "tub/evaluators.hpp"
#include "tub/errors.hpp"
#include "tub/policy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tub {

double mode_velocity_budget_kinetic(double omega, double a, double c_L, double bx) {
    const double c = 1.0 / std::tanh(0.5 * bx);
    const double s = omega * a * c_L;
    return 0.5 * s * s * c * c;
}

// (2 c_L a w)^2 e^x / (e^x - 1)^2 = (c_L a w)^2 / sinh^2(x/2)
double mode_velocity_budget_einstein(double omega, double a, double c_L, double bx) {
    const double s = omega * a * c_L;
    const double sh = std::sinh(0.5 * bx);
    return s * s / (sh * sh);
}

std::vector<BoundReport> speed_displacement_bound(const OscillatorModel& osc, const ProbeState& probe,
                                                  const LatticeSafety& safety, const ThermalContext& ctx) {
    safety.validate();
    const auto& sp = osc.spec;
    const double hbar = ctx.hbar, kT = ctx.kT(), w = sp.omega, m = sp.mass;
    const double bx = hbar * w / kT;
    const auto eig = hermitian_eigh(osc.H);
    CanonicalEnsemble e(eig, ctx);

    // the argument needs the probe's energy populations to be canonical
    const Mat re = eig.to_eigenbasis(probe.rho.matrix());
    double diag_dev = 0.0;
    for (Eigen::Index n = 0; n < re.rows(); ++n) diag_dev = std::max(diag_dev, std::abs(re(n, n).real() - e.weights()(n)));
    const bool canonical_diag = diag_dev <= 1e-9;

    const DenseOperator v = osc.p.scaled(1.0 / m);
    const double ms = long_time_mean_square(probe.rho, v, eig, hbar);

    const int samples = 256;
    double max_var = 0.0;
    const DenseOperator x2 = osc.x * osc.x;
    for (int k = 0; k < samples; ++k) {
        const double t = 2.0 * M_PI / w * k / samples;
        const double mx = evolved_expectation(probe.rho, osc.x, eig, t, hbar);
        max_var = std::max(max_var, evolved_expectation(probe.rho, x2, eig, t, hbar) - mx * mx);
    }
    const double cap = safety.c_L * safety.a;
    const bool lindemann = max_var <= cap * cap;
    const bool asserted = lindemann && canonical_diag;

    auto finish = [&](BoundReport r) {
        r.beta = ctx.beta();
        r.metadata["lindemann_ok"] = lindemann;
        r.metadata["max_var_x"] = max_var;
        r.metadata["lindemann_cap2"] = cap * cap;
        r.metadata["canonical_diagonal"] = canonical_diag;
        r.metadata["beta_hbar_omega"] = bx;
        return r;
    };
    auto rigorous = [&](std::string name, double lhs, double rhs) {
        return asserted ? make_report(std::move(name), lhs, rhs)
                        : make_unasserted(std::move(name), lhs, rhs, Status::informational);
    };

    std::vector<BoundReport> out;
    const double kin = mode_velocity_budget_kinetic(w, safety.a, safety.c_L, bx);
    BoundReport r1 = finish(rigorous("speed_mode_kinetic", kin, ms));
    // same budget through the local (kinetic) Hamiltonian variance
    r1.metadata["budget_from_ed"] = 4.0 / (hbar * hbar) * cap * cap * thermal_variance(e, osc.kinetic);
    out.push_back(r1);
    out.push_back(finish(rigorous("speed_mode_einstein", mode_velocity_budget_einstein(w, safety.a, safety.c_L, bx), ms)));
    const double high = 2.0 * std::pow(safety.c_L * safety.a * kT / hbar, 2);
    out.push_back(finish(make_semiclassical("speed_mode_highT", high, ms, bx <= 0.1)));
    const double varx = thermal_variance(e, osc.x);
    const double lt = thermal_wavelength(m, ctx);
    BoundReport r4 = finish(make_semiclassical("displacement_variance", varx, hbar * hbar / (2.0 * m * kT), bx <= 0.1));
    r4.metadata["lambda_T"] = lt;
    out.push_back(r4);
    return out;
}

std::vector<BoundReport> speed_displacement_bound(const MDTrajectory& tr, std::optional<bool> equipartition,
                                                  const std::optional<LatticeSafety>& safety, const ThermalContext& ctx) {
    if (!equipartition) throw ContractError("speed/displacement on MD data requires the equipartition flag");
    if (tr.frames() < 2 || tr.pos.empty() || tr.vel.empty()) throw ShapeError("trajectory needs positions and velocities");
    const bool reg = *equipartition;
    const std::size_t M = tr.frames();
    const int N = tr.N, d = tr.dim;
    const double hbar = ctx.hbar, kT = ctx.kT(), m = tr.mass;

    double var_sum = 0.0, v2 = 0.0, qd2 = 0.0;
    for (int i = 0; i < N; ++i)
        for (int l = 0; l < d; ++l) {
            double s = 0, s2 = 0;
            for (std::size_t f = 0; f < M; ++f) {
                const double x = tr.x(f, i, l);
                s += x;
                s2 += x * x;
                v2 += tr.v(f, i, l) * tr.v(f, i, l);
            }
            s /= M;
            var_sum += s2 / M - s * s;
        }
    const double k = 2.0 * M_PI / tr.box;
    for (std::size_t f = 0; f < M; ++f)
        for (int i = 0; i < N; ++i) {
            const double q = k * std::cos(k * tr.x(f, i, 0)) * tr.v(f, i, 0);
            qd2 += q * q;
        }
    var_sum /= N;                                  // sum over components, per particle
    v2 /= static_cast<double>(M) * N * d;          // per component
    qd2 /= static_cast<double>(M) * N;
    const double var_comp = var_sum / d;

    std::vector<BoundReport> out;
    BoundReport r1 = make_semiclassical("displacement_variance", var_sum, d * hbar * hbar / (2.0 * m * kT), reg);
    r1.metadata["lambda_T"] = thermal_wavelength(m, ctx);
    out.push_back(r1);
    const double pref = 2.0 * (kT / hbar) * (kT / hbar);
    out.push_back(make_semiclassical("mode_velocity", pref * var_comp, v2, reg));
    if (safety) {
        safety->validate();
        const double cap2 = std::pow(safety->c_L * safety->a, 2);
        const bool lind = var_comp <= cap2;
        BoundReport r = make_semiclassical("mode_velocity_lindemann", pref * cap2, v2, reg && lind);
        r.metadata["lindemann_ok"] = lind;
        r.metadata["var_per_component"] = var_comp;
        out.push_back(r);
    }
    BoundReport rc = make_semiclassical("compact_coordinate", pref, qd2, reg);
    rc.metadata["coordinate"] = "sin(2 pi x / L)";
    out.push_back(rc);
    for (auto& r : out) {
        r.beta = ctx.beta();
        r.metadata["equipartition"] = reg;
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string to_string(InteractionMode m) {
    switch (m) {
    case InteractionMode::variance: return "variance";
    case InteractionMode::bounded_norm: return "bounded_norm";
    case InteractionMode::power_law: return "power_law";
    }
    return "variance";
}

BoundReport acceleration_force_bound(const MDStatistics& st, const ThermalContext& ctx, InteractionMode mode,
                                     std::optional<double> norm_V, std::optional<double> power_law_C, bool in_regime) {
    const double hbar = ctx.hbar, kT = ctx.kT(), m = st.mass;
    const double rhs = st.a2.mean;
    double lhs = 0.0;
    const double nV = norm_V.value_or(st.max_abs_V);
    json meta = json::object();
    switch (mode) {
    case InteractionMode::variance: lhs = 4.0 * st.var_V.mean * st.var_v / (hbar * hbar); break;
    case InteractionMode::bounded_norm: lhs = 4.0 * kT * nV * nV / (m * hbar * hbar); break;
    case InteractionMode::power_law: {
        const double C = power_law_C.value_or(2.0 * st.var_V.mean / (kT * kT));
        lhs = 2.0 * C * kT * kT * kT / (m * hbar * hbar);
        meta["C"] = C;
        break;
    }
    }
    BoundReport r = make_semiclassical("acceleration_" + to_string(mode), lhs, rhs, in_regime);
    r.beta = ctx.beta();
    for (auto& [k, v] : meta.items()) r.metadata[k] = v;
    r.metadata["norm_V"] = nV;
    r.metadata["force_lhs"] = m * m * lhs;
    r.metadata["f2"] = st.f2.mean;
    if (nV > 0) {
        r.metadata["force_over_norm2"] = st.f2.mean / (nV * nV);
        r.metadata["eight_pi_over_lambda2"] = 8.0 * M_PI / std::pow(thermal_wavelength(m, ctx), 2);
    }
    r.metadata["v4_ratio"] = st.v4_ratio.mean;
    r.metadata["a2_err"] = st.a2.err;
    return r;
}

BoundReport force_rate_bound(const ForceRateStats& fr, double z, int d, const ThermalContext& ctx, bool in_regime) {
    if (fr.samples == 0) throw ShapeError("force rate statistics are empty");
    if (std::sqrt(fr.squared_ratio) * fr.dt > 0.25) throw ResolutionError("force sampling too coarse for da/dt");
    const double k = z * d;
    const double lhs = 2.0 * k * std::pow(ctx.kT() / ctx.hbar, 2);
    BoundReport r = make_semiclassical("force_rate", lhs, fr.squared_ratio, in_regime);
    r.beta = ctx.beta();
    r.metadata["k"] = k;
    r.metadata["z"] = z;
    r.metadata["literal_ratio"] = fr.literal_ratio;
    r.metadata["dt_sample"] = fr.dt;
    return r;
}

DiffusionInputs diffusion_inputs(const MDStatistics& st, bool use_variance) {
    DiffusionInputs in;
    in.mass = st.mass;
    in.v4 = st.v4.mean;
    in.V2 = st.V2.mean;
    in.var_V = st.var_V.mean;
    in.use_variance = use_variance;
    return in;
}

namespace {

void demote_if_unmaximal(BoundReport& r, const std::optional<bool>& maximal) {
    if (maximal.has_value()) r.metadata["maximal_at_zero"] = *maximal;
    if (maximal.has_value() && !*maximal && r.status == Status::violated) {
        r.status = Status::informational;
        r.satisfied.reset();
    }
}

} // namespace

BoundReport diffusion_lower_bound(const AutocorrelationSeries& gv, const DiffusionInputs& in, const ThermalContext& ctx) {
    if (gv.values.empty()) throw ShapeError("empty velocity autocorrelation");
    const double G0 = gv.values.front();
    if (!(G0 > 0.0)) throw ContractError("G_v(0) must be positive");
    const double denom = in.use_variance ? in.var_V : in.V2;
    if (!(denom > 0.0) || !(in.v4 > 0.0)) throw DegenerateError("diffusion bound needs <V_i^2> > 0 and <v^4> > 0");
    const auto plus = green_kubo(gv, GKUpper::first_zero);
    const auto full = green_kubo(gv, GKUpper::full);
    const double hbar = ctx.hbar, kT = ctx.kT();
    const double bound = hbar * G0 * G0 / (4.0 * std::sqrt(denom * in.v4));
    BoundReport r = make_semiclassical("diffusion", plus.value, bound, true);
    demote_if_unmaximal(r, in.maximal_at_zero);
    r.beta = ctx.beta();
    r.metadata["D_full"] = full.value;
    r.metadata["first_zero"] = gv.first_zero ? json(*gv.first_zero) : json(nullptr);
    r.metadata["fallback"] = plus.fallback;
    r.metadata["A_D"] = in.A_D;
    r.metadata["D_lower_estimate"] = in.A_D * bound;
    r.metadata["use_variance"] = in.use_variance;
    r.metadata["equipartition_form"] = hbar * kT / (4.0 * std::sqrt(3.0) * in.mass * std::sqrt(in.V2));
    r.metadata["viscosity_upper_SE"] = 2.0 * in.mass * std::sqrt(in.V2) / (hbar * in.radius * M_PI * std::sqrt(3.0));
    if (full.value > 0) r.metadata["viscosity_SE_estimate"] = kT / (6.0 * M_PI * in.radius * full.value);
    bool below = true;
    for (double g : gv.values) below = below && g <= G0 * (1.0 + 1e-12);
    r.metadata["G_max_at_zero"] = below;
    return r;
}

std::string to_string(TransportKind k) {
    switch (k) {
    case TransportKind::diffusion: return "diffusion";
    case TransportKind::shear_viscosity: return "shear_viscosity";
    case TransportKind::bulk_viscosity: return "bulk_viscosity";
    case TransportKind::thermal_conductivity: return "thermal_conductivity";
    }
    return "diffusion";
}

TransportKind transport_kind_from_string(const std::string& s) {
    if (s == "diffusion") return TransportKind::diffusion;
    if (s == "shear_viscosity") return TransportKind::shear_viscosity;
    if (s == "bulk_viscosity") return TransportKind::bulk_viscosity;
    if (s == "thermal_conductivity") return TransportKind::thermal_conductivity;
    throw ConfigError("unknown transport kind '" + s + "'");
}

TransportInputs transport_inputs(const MDTrajectory& tr, const MDStatistics& st, TransportKind kind, std::size_t max_lag) {
    TransportInputs in;
    in.kind = kind;
    const std::size_t M = tr.frames();
    const int N = tr.N;
    if (M < 2) throw ShapeError("trajectory too short");
    max_lag = std::min(max_lag, M - 1);
    const std::size_t probe_stride = std::max<std::size_t>(1, max_lag / 32);

    if (kind == TransportKind::diffusion) {
        in.G = velocity_autocorrelation(tr, max_lag);
        in.yi_y = in.G.values.front();
        in.yi2_y2 = st.v4.mean;
        in.var_h = st.V2.mean;
        // <v(t)^2 v(0)^2> must not exceed its t = 0 value
        bool ok = true;
        for (std::size_t lag = probe_stride; lag <= max_lag && ok; lag += probe_stride) {
            double acc = 0.0;
            std::size_t cnt = 0;
            for (std::size_t f = 0; f + lag < M; ++f)
                for (int i = 0; i < N; ++i)
                    for (int l = 0; l < tr.dim; ++l) {
                        const double a = tr.v(f, i, l), b = tr.v(f + lag, i, l);
                        acc += a * a * b * b;
                        ++cnt;
                    }
            ok = acc / cnt <= in.yi2_y2 * (1.0 + 0.02);
        }
        in.maximal_at_zero = ok;
        return in;
    }
    if (tr.transport.empty()) throw ShapeError("trajectory lacks per-particle transport currents");
    if (tr.dim != 3) throw ContractError("transport currents need dim = 3");

    std::vector<int> comps;
    if (kind == TransportKind::shear_viscosity) comps = {0, 1, 2};
    else if (kind == TransportKind::bulk_viscosity) comps = {3};
    else comps = {4, 5, 6};

    std::vector<std::vector<double>> global;
    double yy = 0.0, y2y2 = 0.0, y0sq = 0.0;
    std::vector<std::vector<double>> ydot_i(comps.size());   // per particle series, flattened f*N+i
    for (std::size_t c = 0; c < comps.size(); ++c) {
        double mean = 0.0;
        for (std::size_t f = 0; f < M; ++f)
            for (int i = 0; i < N; ++i) mean += tr.y(f, i, comps[c]);
        mean /= static_cast<double>(M) * N;
        std::vector<double> g(M, 0.0);
        auto& yi = ydot_i[c];
        yi.resize(M * N);
        for (std::size_t f = 0; f < M; ++f)
            for (int i = 0; i < N; ++i) {
                yi[f * N + i] = tr.y(f, i, comps[c]) - mean;
                g[f] += yi[f * N + i];
            }
        for (std::size_t f = 0; f < M; ++f) {
            y0sq += g[f] * g[f];
            for (int i = 0; i < N; ++i) {
                const double a = yi[f * N + i];
                yy += a * g[f];
                y2y2 += a * a * g[f] * g[f];
            }
        }
        global.push_back(std::move(g));
    }
    const double cnt = static_cast<double>(comps.size()) * M * N;
    in.yi_y = yy / cnt;
    in.yi2_y2 = y2y2 / cnt;
    in.var_h = st.var_local_h;
    const auto vals = multi_autocorrelation(global, max_lag, CorrRoute::fft);
    in.G.values = vals;
    in.G.times.resize(vals.size());
    for (std::size_t k = 0; k < vals.size(); ++k) in.G.times[k] = k * tr.dt_sample;
    in.G.locate_first_zero();

    bool ok = true;
    for (std::size_t lag = probe_stride; lag <= max_lag && ok; lag += probe_stride) {
        double acc = 0.0;
        for (std::size_t c = 0; c < comps.size(); ++c)
            for (std::size_t f = 0; f + lag < M; ++f)
                for (int i = 0; i < N; ++i) {
                    const double a = ydot_i[c][(f + lag) * N + i];
                    acc += a * a * global[c][f] * global[c][f];
                }
        ok = acc / (static_cast<double>(comps.size()) * (M - lag) * N) <= in.yi2_y2 * (1.0 + 0.02);
    }
    in.maximal_at_zero = ok;
    in.extra["Y_global_variance"] = y0sq / (static_cast<double>(comps.size()) * M);
    in.extra["components"] = comps.size();
    return in;
}

BoundReport transport_lower_bound(const TransportInputs& in, const ThermalContext& ctx) {
    if (in.G.values.empty()) throw ShapeError("empty current autocorrelation");
    const double G0 = in.G.values.front();
    if (!(G0 > 0.0)) throw ContractError("G(0) must be positive");
    if (!(in.var_h > 0.0) || !(in.yi2_y2 > 0.0)) throw DegenerateError("transport bound denominators vanish");
    const auto plus = green_kubo(in.G, GKUpper::first_zero);
    const double sh = std::sqrt(in.var_h);
    const double t_min = ctx.hbar * std::abs(in.yi_y) / (2.0 * sh * std::sqrt(in.yi2_y2));
    const double bound = 0.5 * G0 * t_min;
    BoundReport r = make_semiclassical("transport_" + to_string(in.kind), plus.value, bound, true);
    demote_if_unmaximal(r, in.maximal_at_zero);
    r.beta = ctx.beta();
    r.metadata["t_min"] = t_min;
    r.metadata["G0"] = G0;
    r.metadata["fallback"] = plus.fallback;
    r.metadata["gamma_full"] = green_kubo(in.G, GKUpper::full).value;
    for (auto& [k, v] : in.extra.items()) r.metadata[k] = v;
    return r;
}

PressureFluctuationCheck pressure_fluctuation_check(const MDStatistics& lo, const MDStatistics& mid,
                                                    const MDStatistics& hi, double dT) {
    if (!(dT > 0.0)) throw ContractError("dT must be positive");
    if (!(mid.var_energy > 0.0)) throw DegenerateError("energy variance vanishes");
    PressureFluctuationCheck c;
    const double dPdT = (hi.pressure.mean - lo.pressure.mean) / (2.0 * dT);
    const double T = mid.T_target;
    c.G_P0 = mid.var_pressure;
    c.thermodynamic = T * T * T * T * dPdT * dPdT / mid.var_energy;   // kB = 1
    c.ratio = c.G_P0 > 0 ? c.thermodynamic / c.G_P0 : 0.0;
    return c;
}

// ---------------------------------------------------------------------------

ConfigurationSamples gaussian_samples(int d, double s, std::size_t n, std::uint64_t seed) {
    if (d < 1 || !(s > 0.0)) throw ContractError("gaussian_samples: bad arguments");
    ConfigurationSamples out;
    out.d = d;
    out.x.resize(n * d);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, s);
    for (auto& v : out.x) v = nd(rng);
    return out;
}

double scalar_derivative(const ScalarFunction& f, double x, int n) {
    if (n < 0) throw ContractError("negative derivative order");
    switch (f.kind) {
    case ScalarFunction::Kind::constant: return n == 0 ? 1.0 : 0.0;
    case ScalarFunction::Kind::cosine: return std::cos(x / f.width + n * M_PI / 2.0) / std::pow(f.width, n);
    case ScalarFunction::Kind::gaussian: {
        const double u = x / f.width;
        double h0 = 1.0, h1 = u;   // probabilists' Hermite
        double he = n == 0 ? 1.0 : u;
        for (int k = 1; k < n; ++k) {
            he = u * h1 - k * h0;
            h0 = h1;
            h1 = he;
        }
        return ((n % 2) ? -1.0 : 1.0) * std::pow(f.width, -n) * he * std::exp(-0.5 * u * u);
    }
    }
    return 0.0;
}

namespace {

// d^n f / dx_axis^n at one sample point; f is a product over components times the amplitude.
double nd_derivative(const ScalarFunction& f, const double* p, int d, int axis, int n) {
    double v = f.value;
    for (int l = 0; l < d; ++l) v *= scalar_derivative(f, p[l], l == axis ? n : 0);
    return v;
}

} // namespace

BoundReport gradient_bound(const ConfigurationSamples& s, const ScalarFunction& f, int n, double mass,
                           const ThermalContext& ctx, bool equipartition) {
    if (n < 0) throw ContractError("derivative order must be >= 0");
    const std::size_t M = s.count();
    if (M == 0) throw ShapeError("no configuration samples");
    double rhs = 0.0, literal = 0.0;
    for (int l = 0; l < s.d; ++l) {
        double num = 0, mean = 0, den = 0;
        for (std::size_t k = 0; k < M; ++k) {
            const double* p = &s.x[k * s.d];
            const double a = nd_derivative(f, p, s.d, l, n + 1), b = nd_derivative(f, p, s.d, l, n);
            num += a * a;
            mean += a;
            den += b * b;
        }
        if (den / M < policy().denominator_min) throw DegenerateError("<(d^n f)^2> vanishes");
        rhs += num / den;
        literal += (mean / M) * (mean / M) / (den / M);
    }
    rhs /= s.d;
    literal /= s.d;
    const double lhs = 4.0 * mass * ctx.kT() / (ctx.hbar * ctx.hbar);
    BoundReport r = make_semiclassical("gradient_n" + std::to_string(n), lhs, rhs, equipartition);
    r.beta = ctx.beta();
    r.metadata["n"] = n;
    r.metadata["literal_ratio"] = literal;
    r.metadata["lambda_T"] = thermal_wavelength(mass, ctx);
    r.metadata["samples"] = M;
    return r;
}

BoundReport field_gradient_bound(const ConfigurationSamples& s, const ScalarFunction& f, double mass,
                                 const ThermalContext& ctx, bool equipartition) {
    const std::size_t M = s.count();
    if (M == 0) throw ShapeError("no configuration samples");
    double grad = 0, val = 0;
    for (std::size_t k = 0; k < M; ++k) {
        const double* p = &s.x[k * s.d];
        const double f0 = nd_derivative(f, p, s.d, 0, 0);
        val += f0 * f0;
        for (int l = 0; l < s.d; ++l) {
            const double g = nd_derivative(f, p, s.d, l, 1);
            grad += g * g;
        }
    }
    if (val / M < policy().denominator_min) throw DegenerateError("<f^2> vanishes");
    const double lt = thermal_wavelength(mass, ctx);
    BoundReport r = make_semiclassical("field_gradient", 8.0 * M_PI * s.d / (lt * lt), grad / val, equipartition);
    r.beta = ctx.beta();
    r.metadata["d"] = s.d;
    r.metadata["lambda_T"] = lt;
    return r;
}

long double_factorial(int n) {
    long r = 1;
    for (int k = n; k > 1; k -= 2) r *= k;
    return r;
}

std::vector<MomentumPowerRow> momentum_power_table(int n_max, double mass, const ThermalContext& ctx) {
    std::vector<MomentumPowerRow> rows;
    const double mkT = mass * ctx.kT();
    for (int n = 1; n <= n_max; ++n) {
        const double df = static_cast<double>(double_factorial(2 * n - 1));
        const double sub = (n % 2 == 0) ? std::pow(static_cast<double>(double_factorial(n - 1)), 2) : 0.0;
        MomentumPowerRow row;
        row.n = n;
        row.printed = std::pow(2.0 * mkT, n) * (df - sub);
        row.gaussian = std::pow(mkT, n) * (df - sub);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------

SeparationSeries classical_replica_separation(const MDSystem& sys_in, const MDState& start, double delta, long steps,
                                              int sample_every, std::uint64_t seed) {
    if (!(delta > 0.0) || steps < 1 || sample_every < 1) throw ContractError("bad replica separation arguments");
    MDSystem sys = sys_in;
    sys.thermostat.reset();
    MDEngine a(sys), b(sys);
    a.set_state(start);
    MDState pert = start;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    const int d = sys.dim;
    for (int i = 0; i < sys.N; ++i) {
        std::vector<double> u(d);
        double nrm = 0;
        for (auto& c : u) {
            c = nd(rng);
            nrm += c * c;
        }
        nrm = std::sqrt(nrm);
        for (int l = 0; l < d; ++l) {
            const double dx = delta * u[l] / nrm;
            pert.xu[i * d + l] += dx;
            double x = pert.x[i * d + l] + dx;
            x -= sys.box * std::floor(x / sys.box);
            pert.x[i * d + l] = x;
        }
    }
    b.set_state(pert);

    SeparationSeries s;
    s.delta = delta;
    s.scale = sys.box;
    s.d = d;
    double ks = 0, ks2 = 0;
    long kc = 0;
    auto sample = [&](double t) {
        double sep = 0;
        for (int i = 0; i < sys.N; ++i) {
            double r2 = 0;
            for (int l = 0; l < d; ++l) {
                const double dx = a.state().xu[i * d + l] - b.state().xu[i * d + l];
                r2 += dx * dx;
            }
            sep += std::sqrt(r2);
            double k = 0;
            for (int l = 0; l < d; ++l) k += 0.5 * sys.mass * std::pow(a.state().v[i * d + l], 2);
            ks += k;
            ks2 += k * k;
            ++kc;
        }
        s.t.push_back(t);
        s.sep.push_back(sep / sys.N);
    };
    sample(0.0);
    for (long k = 1; k <= steps; ++k) {
        a.step();
        b.step();
        if (k % sample_every == 0) sample(k * sys.dt);
    }
    ks /= kc;
    s.kinetic_var = ks2 / kc - ks * ks;
    return s;
}

BoundReport lyapunov_bound_classical(const SeparationSeries& s, const ThermalContext& ctx) {
    const double lo = 10.0 * s.delta, hi = 1e-3 * s.scale;
    std::vector<double> t, y;
    bool entered = false;
    for (std::size_t k = 0; k < s.t.size(); ++k) {
        if (s.sep[k] >= lo && s.sep[k] <= hi) {
            entered = true;
            t.push_back(s.t[k]);
            y.push_back(std::log(s.sep[k]));
        } else if (entered) {
            break;
        }
    }
    const double lhs = std::sqrt(8.0 * s.kinetic_var) / ctx.hbar;
    const double lhs_eq = 2.0 * ctx.kT() * std::sqrt(static_cast<double>(s.d)) / ctx.hbar;
    auto meta = [&](BoundReport r) {
        r.beta = ctx.beta();
        r.metadata["window_points"] = t.size();
        r.metadata["bound_equipartition"] = lhs_eq;
        return r;
    };
    if (t.size() < 5) return meta(make_unasserted("lyapunov_classical", lhs, 0.0, Status::inconclusive));
    double mt = 0, my = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        mt += t[k];
        my += y[k];
    }
    mt /= t.size();
    my /= t.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        sxy += (t[k] - mt) * (y[k] - my);
        sxx += (t[k] - mt) * (t[k] - mt);
        syy += (y[k] - my) * (y[k] - my);
    }
    const double slope = sxx > 0 ? sxy / sxx : 0.0;
    const double r2 = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 0.0;
    BoundReport r = r2 < 0.9 ? make_unasserted("lyapunov_classical", lhs, slope, Status::inconclusive)
                             : make_semiclassical("lyapunov_classical", lhs, slope, true);
    r.metadata["r2"] = r2;
    return meta(r);
}

// ---------------------------------------------------------------------------

double windowed_position_variance(double speed, double tau, int quadrature_points) {
    if (!(tau > 0.0)) throw ContractError("window must be positive");
    int n = std::max(3, quadrature_points);
    if (n % 2 == 0) ++n;
    const double h = tau / (n - 1);
    double s1 = 0, s2 = 0;
    for (int k = 0; k < n; ++k) {
        const double w = (k == 0 || k == n - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        const double x = speed * k * h;
        s1 += w * x;
        s2 += w * x * x;
    }
    s1 *= h / 3.0 / tau;
    s2 *= h / 3.0 / tau;
    return s2 - s1 * s1;
}

double thermal_wavevector(double mass, const ThermalContext& ctx) { return std::sqrt(mass * ctx.kT()) / ctx.hbar; }

BoundReport ioffe_regel_check(double tau, const BallisticParams& p, const ThermalContext& ctx) {
    if (!(tau > 0.0)) throw ContractError("window must be positive");
    const double var = windowed_position_variance(p.speed, tau);
    const double exact = std::pow(p.speed * tau, 2) / 12.0;
    const double rel = exact > 0 ? std::abs(var - exact) / exact : std::abs(var);
    if (p.speed == 0.0) {
        BoundReport r = make_unasserted("ioffe_regel", 0.0, std::sqrt(3.0), Status::inconclusive);
        r.metadata["k_undefined"] = true;
        return r;
    }
    const double k = p.mass * std::abs(p.speed) / ctx.hbar;
    BoundReport r = make_report("ioffe_regel", k * p.l_mfp, std::sqrt(3.0));
    if (rel > 1e-10) {
        r.status = Status::violated;
        r.satisfied = false;
    }
    r.beta = ctx.beta();
    r.metadata["window_variance"] = var;
    r.metadata["variance_rel_error"] = rel;
    r.metadata["k"] = k;
    return r;
}

// ---------------------------------------------------------------------------

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ShapeError("power-law fit needs >= 2 matching points");
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0) || !(y[k] > 0.0)) throw ContractError("power-law fit needs positive data");
        lx.push_back(std::log(x[k]));
        ly.push_back(std::log(y[k]));
    }
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
    }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxy += (lx[k] - mx) * (ly[k] - my);
        sxx += (lx[k] - mx) * (lx[k] - mx);
        syy += (ly[k] - my) * (ly[k] - my);
    }
    PowerLawFit f;
    f.exponent = sxy / sxx;
    f.intercept = my - f.exponent * mx;
    f.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 1.0;
    f.min_local = 1e300;
    f.max_local = -1e300;
    for (std::size_t k = 0; k + 1 < lx.size(); ++k) {
        const double s = (ly[k + 1] - ly[k]) / (lx[k + 1] - lx[k]);
        f.min_local = std::min(f.min_local, s);
        f.max_local = std::max(f.max_local, s);
    }
    return f;
}

BoundReport lowT_highT_scaling(const std::string& family, const std::vector<double>& T,
                               const std::vector<double>& sqrt_variance, ScalingRegime regime) {
    if (T.size() < 3) throw ContractError("scaling fit needs >= 3 temperatures");
    const double span = std::log10(*std::max_element(T.begin(), T.end()) / *std::min_element(T.begin(), T.end()));
    if (span < 1.0) throw ContractError("temperature grid must span at least one decade");
    const auto fit = fit_power_law(T, sqrt_variance);
    const std::string name = std::string("scaling_") + (regime == ScalingRegime::low_T ? "lowT" : "highT");
    BoundReport r;
    if (regime == ScalingRegime::low_T) {
        if (fit.min_local >= 1.45) r = make_report(name, fit.min_local, 1.45, 0.0);
        else if (fit.r2 < 0.99) r = make_unasserted(name, fit.exponent, 1.45, Status::inconclusive);
        else r = make_report(name, fit.exponent, 1.45, 0.0);
    } else {
        const double dev = std::abs(fit.exponent - 1.0);
        r = fit.r2 < 0.99 ? make_unasserted(name, 0.05, dev, Status::inconclusive) : make_report(name, 0.05, dev, 0.0);
    }
    r.metadata["family"] = family;
    r.metadata["exponent"] = fit.exponent;
    r.metadata["r2"] = fit.r2;
    r.metadata["min_local_slope"] = fit.min_local;
    r.metadata["max_local_slope"] = fit.max_local;
    r.metadata["decades"] = span;
    return r;
}

std::vector<double> fermi_gas_sqrt_variance(const FermiGasSpec& spec, const std::vector<double>& T, double kB) {
    spec.validate();
    std::vector<double> out;
    for (double t : T) {
        ThermalContext ctx(t, spec.hbar, kB);
        const auto in = fermi_gas_rate_bound_inputs(spec, ctx, 2001);
        out.push_back(std::sqrt(in.heat_capacity * kB * t * t));
    }
    return out;
}

std::vector<double> oscillator_sqrt_variance(const OscillatorSpec& spec, const std::vector<double>& T, bool kinetic,
                                             double kB) {
    spec.validate();
    std::vector<double> out;
    const double hw = spec.hbar * spec.omega;
    if (kinetic) {
        for (double t : T) out.push_back(std::sqrt(osc::kinetic_variance(hw, hw / (kB * t))));
        return out;
    }
    const auto model = build_oscillator(spec);
    const auto eig = hermitian_eigh(model.H);
    for (double t : T) {
        CanonicalEnsemble e(eig, ThermalContext(t, spec.hbar, kB));
        out.push_back(std::sqrt(e.energy_variance()));
    }
    return out;
}

} // namespace tub
