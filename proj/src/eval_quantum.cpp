// eval_quantum.cpp - rate bounds on dense quantum models
#include "tub/evaluators.hpp"
#include "tub/errors.hpp"
#include "tub/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace tub {

QuantumModel make_quantum_model(std::string name, DenseOperator H, std::vector<HamiltonianTerm> terms,
                                Eigen::Index valid_block) {
    QuantumModel m;
    m.name = std::move(name);
    m.eig = hermitian_eigh(H);
    m.H = std::move(H);
    m.terms = std::move(terms);
    m.valid_block = valid_block;
    return m;
}

QuantumModel quantum_model(const XYChain& chain) {
    return make_quantum_model("xy_chain", chain.H(), chain.terms());
}

QuantumModel quantum_model(const OscillatorModel& osc) {
    return make_quantum_model("harmonic_mode", osc.H, osc.terms(), osc.valid_block());
}

SiteObservable make_site(const QuantumModel& m, std::string label, DenseOperator q, SelectionMode mode,
                         const std::vector<std::string>& augment) {
    SiteObservable s;
    s.label = std::move(label);
    s.sel = select_local_hamiltonian(m.terms, q, mode, augment, &m.H, m.valid_block);
    s.q = std::move(q);
    return s;
}

std::vector<SiteObservable> xy_sites(const QuantumModel& m, const XYChain& chain, char axis, SelectionMode mode) {
    std::vector<SiteObservable> out;
    for (int i = 0; i < chain.spec().N; ++i)
        out.push_back(make_site(m, std::string("S") + axis + "_" + std::to_string(i), chain.site(axis, i), mode));
    return out;
}

// H~_i = -J sum_j S^y_i S^y_j over neighbours j; (S^y_i)^2 = hbar^2/4 collapses the square.
double xy_local_variance_from_correlators(const XYChain& chain, const CanonicalEnsemble& e, int i) {
    const double J = chain.spec().J, h2 = chain.spec().hbar * chain.spec().hbar / 4.0;
    const auto nb = chain.neighbors(i);
    auto corr = [&](int a, int b) { return thermal_expectation(e, chain.site('y', a) * chain.site('y', b)); };
    double mean = 0.0;
    for (int j : nb) mean += corr(i, j);
    double sq = static_cast<double>(nb.size()) * h2;
    for (int a : nb)
        for (int b : nb)
            if (a != b) sq += corr(a, b);
    return J * J * (h2 * sq - mean * mean);
}

// ---------------------------------------------------------------------------

BoundReport central_rate_bound(const QuantumModel& m, const ProbeState& probe, const std::vector<SiteObservable>& sites,
                               const ThermalContext& ctx) {
    if (sites.empty()) throw ContractError("central rate bound needs at least one site");
    CanonicalEnsemble e(m.eig, ctx);
    const double hbar = ctx.hbar;
    double var_sum = 0.0, ratio2 = 0.0, ratio_abs = 0.0, ratio_q2 = 0.0, robertson_min = 1e300;
    json per_site = json::array();
    for (const auto& s : sites) {
        const DenseOperator ht = s.sel.local();
        const double v_can = thermal_variance(e, ht);
        const double rate = heisenberg_derivative(s.sel, s.q, probe.rho, hbar);
        const double vq = variance(probe.rho, s.q);
        if (vq < policy().denominator_min) throw DegenerateError("Var(Q) vanishes for " + s.label);
        const double q2 = expectation(probe.rho, s.q * s.q);
        const double r = std::abs(rate) / std::sqrt(vq);
        var_sum += v_can;
        ratio2 += r * r;
        ratio_abs += r;
        ratio_q2 += rate * rate / q2;
        // state-wise uncertainty relation, exact for any rho
        const double rob = 2.0 * std::sqrt(std::max(0.0, variance(probe.rho, ht))) / hbar * std::sqrt(vq);
        robertson_min = std::min(robertson_min, rob - std::abs(rate));
        per_site.push_back({{"site", s.label}, {"rate", rate}, {"var_Q", vq}, {"var_H_local", v_can},
                            {"terms", s.sel.selected_labels()}});
    }
    const double n = static_cast<double>(sites.size());
    const double lhs = 2.0 * std::sqrt(var_sum / n) / hbar;
    const double rhs = std::sqrt(ratio2 / n);
    BoundReport r = make_report("central_rate", lhs, rhs);
    r.beta = ctx.beta();
    r.metadata["kT2Cv_local"] = var_sum / n;
    r.metadata["rhs_mean_abs"] = ratio_abs / n;
    r.metadata["rhs_second_moment_form"] = std::sqrt(ratio_q2 / n);
    r.metadata["robertson_min_margin"] = robertson_min;
    r.metadata["probe"] = to_string(probe.kind);
    r.metadata["sites"] = per_site;
    return r;
}

std::string to_string(MomentVariant v) {
    switch (v) {
    case MomentVariant::semiclassical: return "semiclassical";
    case MomentVariant::exact_deformed: return "exact_deformed";
    case MomentVariant::bounded_norm: return "bounded_norm";
    }
    return "semiclassical";
}

MomentVariant moment_variant_from_string(const std::string& s) {
    if (s == "semiclassical") return MomentVariant::semiclassical;
    if (s == "exact_deformed") return MomentVariant::exact_deformed;
    if (s == "bounded_norm") return MomentVariant::bounded_norm;
    throw ConfigError("unknown moment variant '" + s + "'");
}

namespace {

Mat centered(const DensityMatrix& rho, const DenseOperator& a) {
    Mat m = a.matrix();
    m -= expectation(rho, a) * Mat::Identity(m.rows(), m.cols());
    return m;
}

Mat hermitian_part(const Mat& a) { return 0.5 * (a + a.adjoint()); }

// Tr(rho |A|^n) through the eigendecomposition of the Hermitian A.
double abs_moment(const DensityMatrix& rho, const Mat& a, int n) {
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a));
    RVec d = es.eigenvalues().cwiseAbs().array().pow(n);
    Mat f = es.eigenvectors() * d.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
    return trace_product(rho.matrix(), f).real();
}

Mat qdot_matrix(const DenseOperator& ht, const DenseOperator& q, double hbar) {
    const Mat& h = ht.matrix();
    const Mat& qm = q.matrix();
    return hermitian_part(cplx(0.0, 1.0 / hbar) * (h * qm - qm * h));
}

} // namespace

DeformedQuadratic deformed_quadratic(const DensityMatrix& rho, const DenseOperator& htilde, const DenseOperator& q,
                                     double hbar) {
    const Mat dh = centered(rho, htilde), dq = centered(rho, q);
    const Mat& r = rho.matrix();
    const double vh = trace_product(r, dh * dh).real(), vq = trace_product(r, dq * dq).real();
    DeformedQuadratic out;
    const Mat qd = qdot_matrix(htilde, q, hbar);
    out.rhs = trace_product(r, qd * qd).real();
    if (vh < policy().denominator_min || vq < policy().denominator_min) {
        out.lhs = 0.0;
        return out;
    }
    // both deformed states must be genuine densities
    DensityMatrix rh(DenseOperator(hermitian_part(dh * r * dh / vh), true));
    DensityMatrix rq(DenseOperator(hermitian_part(dq * r * dq / vq), true));
    const double a = vh * trace_product(rh.matrix(), dq * dq).real();
    const double b = vq * trace_product(rq.matrix(), dh * dh).real();
    out.lhs = 2.0 / (hbar * hbar) * (a + b);
    return out;
}

BoundReport moment_rate_bound(const QuantumModel& m, const SiteObservable& site, const ThermalContext& ctx, int n,
                              MomentVariant variant, const DensityMatrix* rho_in) {
    if (n < 1) throw ContractError("moment order must be >= 1");
    CanonicalEnsemble e(m.eig, ctx);
    const DensityMatrix rho = rho_in ? *rho_in : canonical_density(e);
    const double hbar = ctx.hbar;
    const DenseOperator ht = site.sel.local();
    const std::string name = "moment_rate_" + to_string(variant);

    if (variant == MomentVariant::exact_deformed) {
        if (n != 2) throw ContractError("exact_deformed variant exists for n = 2 only");
        if (variance(rho, ht) < policy().denominator_min || variance(rho, site.q) < policy().denominator_min)
            throw DegenerateError("deformed densities need nonzero Var(H~) and Var(Q)");
        const auto dq = deformed_quadratic(rho, ht, site.q, hbar);
        BoundReport r = make_report(name, dq.lhs, dq.rhs);
        r.beta = ctx.beta();
        r.metadata["n"] = n;
        r.metadata["site"] = site.label;
        return r;
    }

    const double rhs = abs_moment(rho, qdot_matrix(ht, site.q, hbar), n);
    const double mh = abs_moment(rho, centered(rho, ht), n);
    const double pref = std::pow(2.0 / hbar, n);
    double lhs = 0.0;
    BoundReport r;
    if (variant == MomentVariant::semiclassical) {
        lhs = pref * abs_moment(rho, centered(rho, site.q), n) * mh;
        r = make_semiclassical(name, lhs, rhs, false);
    } else {
        const double qn = operator_norm(site.q);
        lhs = pref * std::pow(qn, n) * mh;
        r = make_semiclassical(name, lhs, rhs, false);
        r.metadata["norm_Q"] = qn;
    }
    r.beta = ctx.beta();
    r.metadata["n"] = n;
    r.metadata["site"] = site.label;
    return r;
}

// ---------------------------------------------------------------------------

BoundReport autocorr_derivative_bound(const AutocorrelationSeries& series, const CanonicalEnsemble& e,
                                      const SiteObservable& site, bool subtract_mean) {
    const auto& t = series.times;
    const auto& g = series.values;
    if (t.size() < 3 || g.size() != t.size()) throw ShapeError("autocorrelation series needs >= 3 points");
    const double hbar = e.context().hbar;
    const DenseOperator ht = site.sel.local();
    const double sh = std::sqrt(std::max(0.0, thermal_variance(e, ht)));
    const double dt = t[1] - t[0];
    if (sh > 0.0 && dt > hbar / sh / 16.0) throw ResolutionError("grid step exceeds hbar/(16 sigma_H)");

    DenseOperator q = site.q;
    if (subtract_mean) q = q.shifted(-thermal_expectation(e, q));
    const Mat qe = e.hamiltonian().to_eigenbasis(q.matrix());
    const Mat q2 = qe * qe;
    const double q4 = thermal_expectation_eigenbasis(e, q2 * q2).real();

    std::vector<double> deriv(t.size(), 0.0);
    double rhs = 0.0;
    for (std::size_t k = 1; k + 1 < t.size(); ++k) {
        deriv[k] = (g[k + 1] - g[k - 1]) / (t[k + 1] - t[k - 1]);
        rhs = std::max(rhs, std::abs(deriv[k]));
    }
    const double lhs = 2.0 / hbar * sh * std::sqrt(q4);

    // per-time form on a subsample and the maximality assumption behind the t = 0 moment
    const RVec& E = e.hamiltonian().values;
    const std::size_t stride = std::max<std::size_t>(1, (t.size() - 2) / 64 + 1);
    double pt_min = 1e300, max_ratio = 0.0;
    for (std::size_t k = 1; k + 1 < t.size(); k += stride) {
        Vec ph(E.size());
        for (Eigen::Index a = 0; a < E.size(); ++a) ph(a) = std::exp(cplx(0.0, E(a) * t[k] / hbar));
        const Mat qt = ph.asDiagonal() * qe * ph.conjugate().asDiagonal();
        const double m1 = thermal_expectation_eigenbasis(e, qe * qt * qt * qe).real();
        const double m2 = thermal_expectation_eigenbasis(e, qt * q2 * qt).real();
        const double mx = std::max(m1, m2);
        max_ratio = std::max(max_ratio, q4 > 0 ? mx / q4 : 0.0);
        pt_min = std::min(pt_min, 2.0 / hbar * sh * std::sqrt(std::max(0.0, mx)) - std::abs(deriv[k]));
    }
    const bool maximal = max_ratio <= 1.0 + 1e-9;

    BoundReport r = make_report("autocorr_derivative", lhs, rhs);
    if (!maximal && r.status == Status::violated) {
        r.status = Status::informational;
        r.satisfied.reset();
    }
    r.beta = e.context().beta();
    r.metadata["sigma_H_local"] = sh;
    r.metadata["Q4"] = q4;
    r.metadata["maximality_ratio"] = max_ratio;
    r.metadata["maximal_at_zero"] = maximal;
    r.metadata["pointwise_min_margin"] = pt_min;
    r.metadata["subtract_mean"] = subtract_mean;
    return r;
}

BoundReport two_point_correlator_bound(const QuantumModel& m, const ProbeState& probe,
                                       const std::vector<SiteObservable>& region, const ThermalContext& ctx,
                                       double window, int window_points) {
    if (region.empty()) throw ContractError("correlator bound needs a nonempty region");
    DenseOperator ql = region.front().q;
    for (std::size_t k = 1; k < region.size(); ++k) ql = ql + region[k].q;
    ql = DenseOperator(hermitian_part(ql.matrix()), true);
    const auto sel = select_local_hamiltonian(m.terms, ql, SelectionMode::minimal, {}, &m.H, m.valid_block);
    CanonicalEnsemble e(m.eig, ctx);
    const double hbar = ctx.hbar;
    const double var_h = thermal_variance(e, sel.local());
    const double lhs = 4.0 * var_h / (hbar * hbar);

    std::vector<double> grid = window > 0.0 ? uniform_grid(window, static_cast<std::size_t>(std::max(2, window_points)))
                                            : std::vector<double>{0.0};
    double acc = 0.0;
    for (double t : grid) {
        DensityMatrix rt = t == 0.0 ? probe.rho
                                    : DensityMatrix(DenseOperator(
                                          hermitian_part(evolve_unitary(probe.rho.op(), m.eig, -t, hbar).matrix()), true));
        const double vq = variance(rt, ql);
        if (vq < policy().denominator_min) throw DegenerateError("Var(Q_lambda) vanishes");
        const double rate = heisenberg_derivative(sel, ql, rt, hbar);
        acc += rate * rate / vq;
    }
    const double rhs = acc / static_cast<double>(grid.size());
    BoundReport r = make_report("two_point_correlator", lhs, rhs);
    r.beta = ctx.beta();
    r.metadata["N_lambda"] = region.size();
    r.metadata["terms"] = sel.selected_labels();
    r.metadata["window"] = window;
    return r;
}

BoundReport lyapunov_bound_quantum(const QuantumModel& m, const ProbeState& pair, const std::vector<SiteObservable>& sites,
                                   const ThermalContext& ctx, const std::vector<double>& grid) {
    if (!pair.partner) throw ContractError("replica-pair probe required");
    if (sites.empty() || grid.empty()) throw ContractError("lyapunov bound needs sites and a time grid");
    const double hbar = ctx.hbar;
    auto at = [&](const DensityMatrix& r, double t) {
        if (t == 0.0) return r;
        return DensityMatrix(DenseOperator(hermitian_part(evolve_unitary(r.op(), m.eig, -t, hbar).matrix()), true));
    };
    std::vector<DenseOperator> hts;
    for (const auto& s : sites) hts.push_back(s.sel.local());

    const double n = static_cast<double>(sites.size());
    double best_margin = 1e300, best_lhs = 0.0, best_rhs = 0.0, best_t = 0.0;
    std::vector<double> log_sep, ts;
    for (double t : grid) {
        const DensityMatrix r1 = at(pair.rho, t), r2 = at(*pair.partner, t);
        double num = 0.0, bnd = 0.0, sep = 0.0;
        for (std::size_t k = 0; k < sites.size(); ++k) {
            const auto& s = sites[k];
            const double d = heisenberg_derivative(s.sel, s.q, r1, hbar) - heisenberg_derivative(s.sel, s.q, r2, hbar);
            const double vq = variance(r1, s.q) + variance(r2, s.q);
            if (vq < policy().denominator_min) throw DegenerateError("replica variances vanish for " + s.label);
            num += d * d / vq;
            bnd += 4.0 / (hbar * hbar) * (variance(r1, hts[k]) + variance(r2, hts[k]));
            sep += std::abs(expectation(r1, s.q) - expectation(r2, s.q));
        }
        const double lhs = std::sqrt(bnd / n), rhs = std::sqrt(num / n);
        if (lhs - rhs < best_margin) {
            best_margin = lhs - rhs;
            best_lhs = lhs;
            best_rhs = rhs;
            best_t = t;
        }
        if (sep > 0.0) {
            ts.push_back(t);
            log_sep.push_back(std::log(sep / n));
        }
    }
    BoundReport r = make_report("lyapunov_quantum", best_lhs, best_rhs);
    r.beta = ctx.beta();
    CanonicalEnsemble e(m.eig, ctx);
    double var_can = 0.0;
    for (const auto& h : hts) var_can += thermal_variance(e, h);
    r.metadata["lambda_bound_canonical"] = std::sqrt(8.0 * var_can / n) / hbar;
    r.metadata["t_min_margin"] = best_t;
    if (ts.size() >= 3) {
        double mt = 0, my = 0;
        for (std::size_t k = 0; k < ts.size(); ++k) {
            mt += ts[k];
            my += log_sep[k];
        }
        mt /= ts.size();
        my /= ts.size();
        double sxy = 0, sxx = 0;
        for (std::size_t k = 0; k < ts.size(); ++k) {
            sxy += (ts[k] - mt) * (log_sep[k] - my);
            sxx += (ts[k] - mt) * (ts[k] - mt);
        }
        if (sxx > 0) r.metadata["log_separation_slope"] = sxy / sxx;
    }
    return r;
}

// ---------------------------------------------------------------------------

namespace {

struct OverlapScan {
    double tau = 0.0;
    bool found = false;
};

// |sum_n w_n exp(-i E_n t / hbar)|; first zero located by golden section inside grid local minima.
OverlapScan first_zero(const std::vector<double>& w, const std::vector<double>& E, double hbar, double step,
                       double horizon) {
    auto overlap = [&](double t) {
        cplx s = 0.0;
        for (std::size_t n = 0; n < w.size(); ++n) s += w[n] * std::exp(cplx(0.0, -E[n] * t / hbar));
        return std::abs(s);
    };
    const long steps = static_cast<long>(std::ceil(horizon / step));
    double g0 = overlap(0.0), g1 = overlap(step);
    for (long k = 1; k < steps; ++k) {
        const double t1 = k * step;
        const double g2 = overlap(t1 + step);
        if (g1 <= g0 && g1 <= g2) {
            double a = t1 - step, b = t1 + step;
            const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = b - phi * (b - a), d = a + phi * (b - a);
            double fc = overlap(c), fd = overlap(d);
            for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, b); ++it) {
                if (fc < fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - phi * (b - a);
                    fc = overlap(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + phi * (b - a);
                    fd = overlap(d);
                }
            }
            const double tm = 0.5 * (a + b);
            if (overlap(tm) < 1e-6) return {tm, true};
        }
        g0 = g1;
        g1 = g2;
    }
    return {};
}

BoundReport orthogonality_report(const std::vector<double>& w, const std::vector<double>& E, double hbar,
                                 double horizon, const std::string& mode) {
    double m1 = 0, m2 = 0;
    for (std::size_t n = 0; n < w.size(); ++n) {
        m1 += w[n] * E[n];
        m2 += w[n] * E[n] * E[n];
    }
    const double sigma = std::sqrt(std::max(0.0, m2 - m1 * m1));
    const double range = *std::max_element(E.begin(), E.end()) - *std::min_element(E.begin(), E.end());
    if (!(sigma > 1e-12 * std::max(1.0, range))) {
        BoundReport r = make_unasserted("orthogonality_time", horizon, horizon, Status::inconclusive);
        r.satisfied = true;
        r.metadata["stationary"] = true;
        r.metadata["mode"] = mode;
        return r;
    }
    const double bound = M_PI * hbar / (2.0 * sigma);
    if (horizon <= 0.0) horizon = 50.0 * bound;
    double step = bound / 200.0;
    if (range > 0) step = std::min(step, M_PI * hbar / (8.0 * range));
    const auto scan = first_zero(w, E, hbar, step, horizon);
    BoundReport r;
    if (scan.found) {
        r = make_report("orthogonality_time", scan.tau, bound);
    } else {
        r = make_unasserted("orthogonality_time", horizon, bound, Status::inconclusive);
        r.satisfied = horizon >= bound;
    }
    r.metadata["sigma_H"] = sigma;
    r.metadata["horizon"] = horizon;
    r.metadata["found"] = scan.found;
    r.metadata["mode"] = mode;
    return r;
}

} // namespace

BoundReport orthogonality_time_bound(const Eigendecomposition& h, const Vec& psi, double hbar, double horizon) {
    if (psi.size() != h.dim()) throw ShapeError("state dimension mismatch");
    const double nrm = psi.norm();
    if (std::abs(nrm - 1.0) > 1e-10) throw ContractError("state must be normalized");
    const Vec c = h.vectors.adjoint() * psi;
    std::vector<double> w(c.size()), E(c.size());
    for (Eigen::Index n = 0; n < c.size(); ++n) {
        w[n] = std::norm(c(n));
        E[n] = h.values(n);
    }
    return orthogonality_report(w, E, hbar, horizon, "pure");
}

BoundReport orthogonality_time_bound(const CanonicalEnsemble& e, double horizon) {
    const RVec& p = e.weights();
    std::vector<double> w(p.data(), p.data() + p.size());
    std::vector<double> E(e.hamiltonian().values.data(), e.hamiltonian().values.data() + p.size());
    BoundReport r = orthogonality_report(w, E, e.context().hbar, horizon, "thermofield_double");
    r.beta = e.context().beta();
    return r;
}

BoundReport thermalization_window_bound(const QuantumModel& m, const ProbeState& probe, const SiteObservable& site,
                                        const ThermalContext& ctx, int points_per_decade) {
    if (points_per_decade < 2) throw ContractError("points_per_decade must be >= 2");
    CanonicalEnsemble e(m.eig, ctx);
    const double hbar = ctx.hbar;
    const double sh = std::sqrt(std::max(0.0, thermal_variance(e, site.sel.local())));
    if (sh <= 0.0) throw DegenerateError("local Hamiltonian has zero thermal variance");
    const double ref = hbar / sh;
    const Eigendecomposition eig = resolve_degeneracies(m.eig, site.q);
    const double diag = diagonal_ensemble_average(probe.rho, site.q, eig);
    const double dev0 = std::abs(expectation(probe.rho, site.q) - diag);
    if (dev0 < 1e-6) throw ContractError("probe is stationary for this observable");

    std::vector<double> win, dev;
    const int decades = 5;   // 1e-2 .. 1e3 in units of hbar/sigma
    for (int k = 0; k <= decades * points_per_decade; ++k) {
        const double T = ref * std::pow(10.0, -2.0 + static_cast<double>(k) / points_per_decade);
        win.push_back(T);
        dev.push_back(std::abs(windowed_average(probe.rho, site.q, eig, T, hbar) - diag));
    }
    std::size_t star = win.size();
    for (std::size_t k = win.size(); k-- > 0;) {
        if (dev[k] > 0.1 * dev0) break;
        star = k;
    }
    const double at50 = std::abs(windowed_average(probe.rho, site.q, eig, 50.0 * ref, hbar) - diag) / dev0;

    // one bin per decade of the window: maxima must not increase
    bool envelope = true;
    double prev = 1e300;
    for (int b = 0; b < decades; ++b) {
        double mx = 0.0;
        for (int k = b * points_per_decade; k < (b + 1) * points_per_decade; ++k) mx = std::max(mx, dev[k]);
        if (mx > prev * (1.0 + 1e-9) + 1e-14) envelope = false;
        prev = mx;
    }

    const double ratio = star < win.size() ? win[star] / ref : std::numeric_limits<double>::infinity();
    BoundReport r = make_unasserted("thermalization_window", star < win.size() ? ratio : 0.0, 1.0,
                                    star < win.size() ? Status::informational : Status::inconclusive);
    r.beta = ctx.beta();
    r.metadata["window_star_over_ref"] = star < win.size() ? json(ratio) : json(nullptr);
    r.metadata["ref_time"] = ref;
    r.metadata["deviation0"] = dev0;
    r.metadata["deviation_at_50_ref"] = at50;
    r.metadata["deviation_at_50_ref_over_diag"] = std::abs(diag) > 0 ? json(at50 * dev0 / std::abs(diag)) : json(nullptr);
    r.metadata["envelope_nonincreasing"] = envelope;
    r.metadata["diagonal_average"] = diag;
    return r;
}

// ---------------------------------------------------------------------------

BoundReport reflection_positivity_audit(const IsingLatticeSpec& spec, double beta) {
    for (const auto& b : spec.resolved_bonds())
        if (b.J < 0) throw ContractError("antiferromagnetic bond: reflection positivity audit needs J >= 0");
    spec.validate();
    const auto en = enumerate_ising(spec, beta);
    const auto& c = en.covariance;
    const double min_cov = c.minCoeff();
    const double sum_var = c.diagonal().sum();
    BoundReport r = make_report("reflection_positivity", en.energy_variance, sum_var);
    if (min_cov < -1e-12) {
        r.status = Status::violated;
        r.satisfied = false;
    }
    r.beta = beta;
    r.metadata["min_covariance"] = min_cov;
    r.metadata["terms"] = en.labels.size();
    r.metadata["Nprime_var_mean"] = static_cast<double>(c.rows()) * c.diagonal().mean();
    return r;
}

BoundReport reflection_positivity_audit(const std::vector<HamiltonianTerm>& terms, const CanonicalEnsemble& e,
                                        bool decoupled) {
    if (terms.empty()) throw ContractError("no terms");
    const std::size_t n = terms.size();
    std::vector<Mat> te;
    std::vector<double> mean(n);
    for (std::size_t k = 0; k < n; ++k) {
        te.push_back(e.hamiltonian().to_eigenbasis(terms[k].op.matrix()));
        mean[k] = thermal_expectation_eigenbasis(e, te[k]).real();
    }
    double min_cov = 1e300, sum_var = 0.0, total = 0.0;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            const double c = 0.5 * (thermal_expectation_eigenbasis(e, te[a] * te[b]).real() +
                                    thermal_expectation_eigenbasis(e, te[b] * te[a]).real()) -
                             mean[a] * mean[b];
            total += c;
            if (a == b) sum_var += c;
            else min_cov = std::min(min_cov, c);
        }
    BoundReport r;
    if (decoupled) {
        r = make_report("reflection_positivity", total, sum_var);
        if (std::abs(total - sum_var) > 1e-9 * std::max(1.0, std::abs(total))) {
            r.status = Status::violated;
            r.satisfied = false;
        }
    } else {
        r = make_unasserted("reflection_positivity", total, sum_var, Status::informational);
    }
    r.beta = e.context().beta();
    r.metadata["min_covariance"] = n > 1 ? json(min_cov) : json(nullptr);
    r.metadata["decoupled"] = decoupled;
    return r;
}

// ---------------------------------------------------------------------------

double random_phase_rate_squared(const Eigendecomposition& h, const Mat& q_eig, double hbar, std::uint64_t seed) {
    const Eigen::Index D = h.dim();
    std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                     static_cast<std::uint32_t>(D)};
    std::mt19937_64 rng(sq);
    std::uniform_real_distribution<double> U(0.0, 2.0 * M_PI);
    Vec c(D);
    for (Eigen::Index n = 0; n < D; ++n) c(n) = std::polar(1.0 / std::sqrt(static_cast<double>(D)), U(rng));
    const Vec ec = h.values.cast<cplx>().cwiseProduct(c);
    const Vec qc = q_eig * c;
    const cplx v = c.dot(h.values.cast<cplx>().cwiseProduct(qc)) - c.dot(q_eig * ec);
    const double rate = (cplx(0.0, 1.0 / hbar) * v).real();
    return rate * rate;
}

BoundReport eth_offdiagonal_experiment(const std::vector<int>& sizes, int seeds, std::uint64_t seed, double J) {
    if (sizes.size() < 2 || seeds < 1) throw ContractError("ETH experiment needs >= 2 sizes and >= 1 seed");
    std::vector<double> dims, means;
    for (int N : sizes) {
        XYChain chain(XYChainSpec{N, J, true, 1.0});
        const auto eig = hermitian_eigh(chain.H());
        const Mat qe = eig.to_eigenbasis(chain.site('x', 0).matrix());
        double acc = 0.0;
        for (int s = 0; s < seeds; ++s)
            acc += random_phase_rate_squared(eig, qe, 1.0, seed * 1000003ULL + static_cast<std::uint64_t>(N) * 7919ULL + s);
        dims.push_back(static_cast<double>(eig.dim()));
        means.push_back(acc / seeds);
    }
    const auto fit = fit_power_law(dims, means);
    const double span = std::log10(*std::max_element(dims.begin(), dims.end()) /
                                   *std::min_element(dims.begin(), dims.end()));
    const double dev = std::abs(fit.exponent + 1.0);
    BoundReport r = span >= 1.2 ? make_report("eth_offdiagonal", 0.3, dev, 0.0)
                                : make_unasserted("eth_offdiagonal", 0.3, dev, Status::inconclusive);
    r.metadata["slope"] = fit.exponent;
    r.metadata["r2"] = fit.r2;
    r.metadata["decades"] = span;
    r.metadata["dims"] = dims;
    r.metadata["mean_rate_squared"] = means;
    return r;
}

} // namespace tub
