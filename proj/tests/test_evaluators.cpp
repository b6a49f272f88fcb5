#include "oracles.hpp"
#include "tub/errors.hpp"
#include "tub/evaluators.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace tub;

namespace {

OscillatorModel oscillator(int n_max) {
    OscillatorSpec sp;
    sp.n_max = n_max;
    return build_oscillator(sp);
}

// Yy bonds touching site i: the minimal local Hamiltonian for S^x_i, built from oracle matrices.
oracle::M xy_local_oracle(int i, int N, double J) {
    const int D = 1 << N;
    oracle::M h = oracle::M::Zero(D, D);
    for (int j : {(i + N - 1) % N, (i + 1) % N}) h -= J * oracle::spin(oracle::sy(), i, N) * oracle::spin(oracle::sy(), j, N);
    return h;
}

double var_of(const oracle::M& rho, const oracle::M& a) {
    const double m = oracle::tr_re(rho * a);
    return oracle::tr_re(rho * a * a) - m * m;
}

// i Tr(rho [H, Q]), hbar = 1
double rate_of(const oracle::M& rho, const oracle::M& h, const oracle::M& q) {
    return (oracle::C(0, 1) * (rho * (h * q - q * h)).trace()).real();
}

oracle::M random_hermitian(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    oracle::M a(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) a(r, c) = oracle::C(nd(rng), nd(rng));
    return 0.5 * (a + a.adjoint());
}

oracle::M random_density(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    oracle::M g(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) g(r, c) = oracle::C(nd(rng), nd(rng));
    oracle::M rho = g * g.adjoint();
    return rho / rho.trace().real();
}

} // namespace

TEST_CASE("central rate bound: canonical probe is stationary") {
    const XYChain chain({4, 1.0, true, 1.0});
    const auto m = quantum_model(chain);
    for (double b : {0.5, 1.0, 2.0}) {
        const auto ctx = ThermalContext::from_beta(b);
        CanonicalEnsemble e(m.eig, ctx);
        const auto r = central_rate_bound(m, canonical_probe(e), xy_sites(m, chain, 'x'), ctx);
        CHECK(std::abs(r.rhs) < 1e-10);
        CHECK(r.status == Status::satisfied);
    }
}

TEST_CASE("central rate bound: tilted XY chain against dense oracle") {
    const int N = 4;
    const XYChain chain({N, 1.0, true, 1.0});
    const auto m = quantum_model(chain);
    const auto tilt = xy_tilt_operator(chain);
    const oracle::M h = oracle::xy_hamiltonian(N, 1.0, true);
    for (double b : {0.5, 1.0, 2.0}) {
        const auto ctx = ThermalContext::from_beta(b);
        const auto probe = tilted_probe(chain.H(), tilt, 0.1, ctx);
        const auto r = central_rate_bound(m, probe, xy_sites(m, chain, 'x'), ctx);
        CHECK(r.status == Status::satisfied);
        CHECK(r.margin >= -1e-9);

        const oracle::M rho_can = oracle::gibbs(h, b);
        const oracle::M rho = oracle::gibbs(h + 0.1 * tilt.matrix(), b);
        double vsum = 0.0, r2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const oracle::M q = oracle::spin(oracle::sx(), i, N);
            vsum += var_of(rho_can, xy_local_oracle(i, N, 1.0));
            // the full H gives the same rate: the other terms commute with S^x_i
            const double rt = rate_of(rho, h, q);
            r2 += rt * rt / var_of(rho, q);
        }
        CHECK(r.lhs == doctest::Approx(2.0 * std::sqrt(vsum / N)).epsilon(1e-10));
        CHECK(r.rhs == doctest::Approx(std::sqrt(r2 / N)).epsilon(1e-10));
        CHECK(r.metadata["rhs_mean_abs"].get<double>() <= r.rhs + 1e-12);
        CHECK(r.metadata["robertson_min_margin"].get<double>() >= -1e-10);
    }
}

TEST_CASE("central rate bound: minimal kinetic vs full mode Hamiltonian") {
    const auto osc = oscillator(40);
    const auto m = quantum_model(osc);
    const auto kin = make_site(m, "x", osc.x);
    const auto full = make_site(m, "x", osc.x, SelectionMode::augmented, {"potential"});
    CHECK(kin.sel.selected_labels() == std::vector<std::string>{"kinetic"});
    CHECK(full.sel.selected.size() == 2);

    const auto ctx = ThermalContext::from_beta(5.0);
    const auto probe = tilted_probe(osc.H, osc.p, 0.05, ctx);
    const auto rk = central_rate_bound(m, probe, {kin}, ctx);
    const auto rf = central_rate_bound(m, probe, {full}, ctx);
    CHECK(rk.status == Status::satisfied);
    CHECK(rf.status == Status::satisfied);
    CHECK(rf.lhs < rk.lhs);
    CHECK(rk.rhs == doctest::Approx(rf.rhs).epsilon(1e-10));
    // closed forms: Var(p^2/2) = coth^2(b/2)/8, Var(H) = e^b/(e^b - 1)^2
    CHECK(rk.lhs == doctest::Approx(2.0 * std::sqrt(osc::kinetic_variance(1.0, 5.0))).epsilon(1e-8));
    CHECK(rf.lhs == doctest::Approx(2.0 * std::sqrt(std::exp(5.0) / std::pow(std::expm1(5.0), 2))).epsilon(1e-8));
}

TEST_CASE("property: minimal selection vs decoupled-mode total at moderate temperature") {
    const auto osc = oscillator(60);
    const auto m = quantum_model(osc);
    const auto kin = make_site(m, "x", osc.x);
    const int modes = 3;
    for (double b = 0.5; b <= 2.0001; b += 0.25) {
        CanonicalEnsemble e(m.eig, ThermalContext::from_beta(b));
        CHECK(thermal_variance(e, kin.sel.local()) <= modes * e.energy_variance());
    }
    // deep in the gapped regime the single-mode H is the tighter choice
    CanonicalEnsemble cold(m.eig, ThermalContext::from_beta(5.0));
    CHECK(modes * cold.energy_variance() < thermal_variance(cold, kin.sel.local()));
}

TEST_CASE("central rate bound errors") {
    const auto osc = oscillator(20);
    const auto m = quantum_model(osc);
    const auto ctx = ThermalContext::from_beta(1.0);
    CanonicalEnsemble e(m.eig, ctx);
    CHECK_THROWS_AS(central_rate_bound(m, canonical_probe(e), {}, ctx), ContractError);
    // Q = identity has zero variance in any state
    const auto id = make_site(m, "one", DenseOperator::identity(osc.H.dim()));
    CHECK_THROWS_AS(central_rate_bound(m, canonical_probe(e), {id}, ctx), DegenerateError);
}

TEST_CASE("moment rate bound") {
    const int N = 4;
    const XYChain chain({N, 1.0, true, 1.0});
    const auto m = quantum_model(chain);
    const oracle::M h = oracle::xy_hamiltonian(N, 1.0, true);

    SUBCASE("commuting Q gives zero rate") {
        const auto s = make_site(m, "H", chain.H());
        for (int n : {2, 4}) {
            const auto r = moment_rate_bound(m, s, ThermalContext(1.0), n, MomentVariant::semiclassical);
            CHECK(std::abs(r.rhs) < 1e-10);
        }
    }
    SUBCASE("exact deformed form on the XY chain") {
        const auto sites = xy_sites(m, chain, 'x');
        for (double b : {0.5, 1.0, 2.0}) {
            const oracle::M rho = oracle::gibbs(h, b);
            for (int i = 0; i < N; ++i) {
                const auto r = moment_rate_bound(m, sites[i], ThermalContext::from_beta(b), 2, MomentVariant::exact_deformed);
                CHECK(r.status == Status::satisfied);
                CHECK(r.margin >= -1e-9);
                const oracle::M ht = xy_local_oracle(i, N, 1.0), q = oracle::spin(oracle::sx(), i, N);
                const oracle::M I = oracle::M::Identity(h.rows(), h.cols());
                const oracle::M dh = ht - oracle::tr_re(rho * ht) * I, dq = q - oracle::tr_re(rho * q) * I;
                const double lhs = 2.0 * (oracle::tr_re(rho * dh * dq * dq * dh) + oracle::tr_re(rho * dq * dh * dh * dq));
                const oracle::M qd = oracle::C(0, 1) * (ht * q - q * ht);
                CHECK(r.lhs == doctest::Approx(lhs).epsilon(1e-10));
                CHECK(r.rhs == doctest::Approx(oracle::tr_re(rho * qd * qd)).epsilon(1e-10));
            }
        }
    }
    SUBCASE("bounded-norm form") {
        const auto s = make_site(m, "Sx_0", chain.site('x', 0));
        const auto ctx = ThermalContext(1.0);
        const auto r = moment_rate_bound(m, s, ctx, 2, MomentVariant::bounded_norm);
        CHECK(r.metadata["norm_Q"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
        // (2 ||Q|| / hbar)^2 Var(H~) = Var(H~) for ||S^x|| = 1/2
        CanonicalEnsemble e(m.eig, ctx);
        CHECK(r.lhs == doctest::Approx(xy_local_variance_from_correlators(chain, e, 0)).epsilon(1e-10));
        CHECK(!r.failed());
    }
    SUBCASE("argument checks") {
        const auto s = make_site(m, "Sx_0", chain.site('x', 0));
        CHECK_THROWS_AS(moment_rate_bound(m, s, ThermalContext(1.0), 0, MomentVariant::semiclassical), ContractError);
        CHECK_THROWS_AS(moment_rate_bound(m, s, ThermalContext(1.0), 4, MomentVariant::exact_deformed), ContractError);
        CHECK(moment_variant_from_string("bounded_norm") == MomentVariant::bounded_norm);
        CHECK_THROWS_AS(moment_variant_from_string("nope"), ConfigError);
    }
}

TEST_CASE("deformed quadratic against a direct formula") {
    std::mt19937_64 rng(77);
    for (int d = 2; d <= 7; ++d) {
        const oracle::M rho = random_density(d, rng), ht = random_hermitian(d, rng), q = random_hermitian(d, rng);
        const auto got = deformed_quadratic(DensityMatrix(DenseOperator(rho, true)), DenseOperator(ht, true),
                                            DenseOperator(q, true), 1.0);
        const oracle::M I = oracle::M::Identity(d, d);
        const oracle::M dh = ht - oracle::tr_re(rho * ht) * I, dq = q - oracle::tr_re(rho * q) * I;
        const double lhs = 2.0 * (oracle::tr_re(rho * dh * dq * dq * dh) + oracle::tr_re(rho * dq * dh * dh * dq));
        const oracle::M qd = oracle::C(0, 1) * (ht * q - q * ht);
        CHECK(got.lhs == doctest::Approx(lhs).epsilon(1e-10));
        CHECK(got.rhs == doctest::Approx(oracle::tr_re(rho * qd * qd)).epsilon(1e-10));
        CHECK(got.lhs >= got.rhs - 1e-9 * std::max(1.0, got.lhs));
    }
}

TEST_CASE("property: deformed moment never violated up to dim 256") {
    const auto s = deformed_moment_fuzz(40, 256, 5);
    CHECK(s.draws == 40);
    CHECK(s.violations == 0);
}

TEST_CASE("property: uncertainty and Cauchy-Schwarz fuzzers") {
    const auto u = uncertainty_fuzz(500, 8, 11);
    CHECK(u.violations == 0);
    CHECK(u.min_margin >= -1e-9);
    const auto c = cauchy_schwarz_fuzz(500, 8, 12);
    CHECK(c.violations == 0);
    // same seed, same summary
    const auto u2 = uncertainty_fuzz(500, 8, 11);
    CHECK(u2.min_margin == u.min_margin);
}

TEST_CASE("oscillator closed forms") {
    OscillatorSpec sp;
    sp.n_max = 80;
    for (double bx : {0.5, 1.0, 2.0, 5.0}) {
        const auto cf = oscillator_closed_form(sp, bx);
        CHECK(cf.var_rel_err < 1e-8);
        CHECK(cf.z_rel_err < 1e-8);
    }
}

TEST_CASE("autocorrelation derivative bound") {
    SUBCASE("constant Q") {
        const auto osc = oscillator(30);
        const auto m = quantum_model(osc);
        CanonicalEnsemble e(m.eig, ThermalContext(1.0));
        const auto s = make_site(m, "one", DenseOperator::identity(osc.H.dim()));
        const auto series = autocorrelation(e, s.q, uniform_grid(5.0, 101));
        const auto r = autocorr_derivative_bound(series, e, s);
        CHECK(r.rhs == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(r.status == Status::satisfied);
    }
    SUBCASE("oscillator position at beta hbar omega = 1") {
        const auto osc = oscillator(60);
        const auto m = quantum_model(osc);
        CanonicalEnsemble e(m.eig, ThermalContext::from_beta(1.0));
        const auto s = make_site(m, "x", osc.x);
        const auto series = autocorrelation(e, osc.x, uniform_grid(12.0, 601));
        const double amp = 0.5 / std::tanh(0.5);
        for (std::size_t k = 0; k < series.times.size(); k += 50)
            CHECK(series.values[k] == doctest::Approx(amp * std::cos(series.times[k])).epsilon(1e-8));
        const auto r = autocorr_derivative_bound(series, e, s);
        CHECK(r.status == Status::satisfied);
        CHECK(r.rhs == doctest::Approx(amp).epsilon(1e-3));
        // <x^4> = 3 <x^2>^2 for the thermal Gaussian
        CHECK(r.lhs == doctest::Approx(2.0 * std::sqrt(osc::kinetic_variance(1.0, 1.0)) * std::sqrt(3.0) * amp).epsilon(1e-6));
        CHECK_THROWS_AS(autocorr_derivative_bound(autocorrelation(e, osc.x, uniform_grid(12.0, 13)), e, s), ResolutionError);
    }
    SUBCASE("XY S^x at beta J = 1") {
        const XYChain chain({4, 1.0, true, 1.0});
        const auto m = quantum_model(chain);
        CanonicalEnsemble e(m.eig, ThermalContext(1.0));
        const auto s = make_site(m, "Sx_1", chain.site('x', 1));
        const auto r = autocorr_derivative_bound(autocorrelation(e, s.q, uniform_grid(20.0, 401)), e, s);
        CHECK(r.status == Status::satisfied);
    }
}

TEST_CASE("two-point correlator bound") {
    const XYChain chain({4, 1.0, true, 1.0});
    const auto m = quantum_model(chain);
    const auto ctx = ThermalContext(1.0);
    const auto probe = tilted_probe(chain.H(), xy_tilt_operator(chain), 0.1, ctx);
    const auto sites = xy_sites(m, chain, 'x');
    // single site reduces to the central bound, squared
    const auto c = central_rate_bound(m, probe, {sites[2]}, ctx);
    const auto t = two_point_correlator_bound(m, probe, {sites[2]}, ctx);
    CHECK(t.lhs == doctest::Approx(c.lhs * c.lhs).epsilon(1e-9));
    CHECK(t.rhs == doctest::Approx(c.rhs * c.rhs).epsilon(1e-9));
    const auto whole = two_point_correlator_bound(m, probe, sites, ctx, 3.0, 16);
    CHECK(whole.status == Status::satisfied);
    CanonicalEnsemble e(m.eig, ctx);
    CHECK(std::abs(two_point_correlator_bound(m, canonical_probe(e), sites, ctx).rhs) < 1e-10);
}

TEST_CASE("quantum Lyapunov bound on replica pairs") {
    const XYChain chain({4, 1.0, true, 1.0});
    const auto m = quantum_model(chain);
    for (double b : {0.5, 1.0}) {
        const auto ctx = ThermalContext::from_beta(b);
        const auto pair = replica_pair_probe(chain.H(), xy_tilt_operator(chain), 0.1, ctx);
        const auto r = lyapunov_bound_quantum(m, pair, xy_sites(m, chain, 'x'), ctx, uniform_grid(4.0, 17));
        CHECK(r.status == Status::satisfied);
        CHECK(r.margin >= -1e-9);
    }
    CanonicalEnsemble e(m.eig, ThermalContext(1.0));
    CHECK_THROWS_AS(lyapunov_bound_quantum(m, canonical_probe(e), xy_sites(m, chain, 'x'), ThermalContext(1.0), {0.0}),
                    ContractError);
}

TEST_CASE("classical Lyapunov: trapped particles are not chaotic") {
    MDSystem sys;
    sys.N = 8;
    sys.box = 10.0;
    sys.potential = PotentialKind::trap;
    sys.dt = 0.005;
    MDEngine eng(sys);
    eng.lattice_start(1.0, 3);
    const auto s = classical_replica_separation(sys, eng.state(), 1e-8, 4000, 20, 4);
    const auto r = lyapunov_bound_classical(s, ThermalContext(1.0));
    CHECK(r.status == Status::inconclusive);
    CHECK(!r.satisfied.has_value());
}

TEST_CASE("mode velocity budgets") {
    // Einstein form vanishes as beta -> infinity
    CHECK(mode_velocity_budget_einstein(1.0, 1.0, 0.1, 60.0) < 1e-20);
    CHECK(mode_velocity_budget_einstein(1.0, 1.0, 0.1, 10.0) < mode_velocity_budget_einstein(1.0, 1.0, 0.1, 5.0));
    // high-T limits: 2 (c_L a kT/hbar)^2 for the coth^2 form, twice that for the Einstein form
    const double a = 1.3, cl = 0.1;
    for (double T : {1e3, 1e4}) {
        const double bx = 1.0 / T;
        const double ref = 2.0 * std::pow(cl * a * T, 2);
        CHECK(mode_velocity_budget_kinetic(1.0, a, cl, bx) == doctest::Approx(ref).epsilon(1e-5));
        CHECK(mode_velocity_budget_einstein(1.0, a, cl, bx) == doctest::Approx(2.0 * ref).epsilon(1e-5));
    }
}

TEST_CASE("speed and displacement on the quantum oscillator") {
    const auto osc = oscillator(60);
    const auto eig = hermitian_eigh(osc.H);
    const auto ctx = ThermalContext::from_beta(1.0);
    CanonicalEnsemble e(eig, ctx);
    const auto probe = dephased_mixture_probe(e, 0.5, 9);
    const auto reps = speed_displacement_bound(osc, probe, LatticeSafety{10.0, 0.5}, ctx);
    REQUIRE(reps.size() == 4);
    CHECK(reps[0].name == "speed_mode_kinetic");
    CHECK(reps[0].status == Status::satisfied);
    CHECK(reps[1].name == "speed_mode_einstein");
    CHECK(reps[1].status == Status::satisfied);
    CHECK(reps[0].metadata["canonical_diagonal"].get<bool>());
    CHECK(reps[0].metadata["budget_from_ed"].get<double>() == doctest::Approx(reps[0].lhs).epsilon(1e-8));
    // a tiny Lindemann cap makes the rigorous forms informational
    const auto tight = speed_displacement_bound(osc, probe, LatticeSafety{1.0, 0.01}, ctx);
    CHECK(tight[0].status == Status::informational);

    CHECK_THROWS_AS(speed_displacement_bound(MDTrajectory{}, std::nullopt, std::nullopt, ctx), ContractError);
}

TEST_CASE("acceleration and force-rate bounds") {
    MDStatistics ideal;
    ideal.mass = 1.0;
    ideal.var_v = 1.0;
    const auto r = acceleration_force_bound(ideal, ThermalContext(1.0), InteractionMode::variance);
    CHECK(r.rhs == 0.0);
    CHECK(r.status == Status::satisfied);

    ForceRateStats fr;
    fr.squared_ratio = 0.5;
    fr.literal_ratio = 0.01;
    fr.dt = 0.01;
    fr.samples = 10;
    const ThermalContext ctx(2.0, 0.5);
    const auto f = force_rate_bound(fr, 12, 3, ctx);
    CHECK(f.metadata["k"].get<double>() == 36.0);
    CHECK(f.lhs == doctest::Approx(72.0 * std::pow(2.0 / 0.5, 2)).epsilon(1e-14));
    fr.squared_ratio = 0.0;
    CHECK(force_rate_bound(fr, 12, 3, ctx).rhs == 0.0);
    fr.squared_ratio = 100.0;
    fr.dt = 0.1;
    CHECK_THROWS_AS(force_rate_bound(fr, 12, 3, ctx), ResolutionError);
    fr.samples = 0;
    CHECK_THROWS_AS(force_rate_bound(fr, 12, 3, ctx), ShapeError);
}

TEST_CASE("diffusion and transport lower bounds") {
    const double kT = 1.5, m = 2.0, gamma = 0.7, hbar = 0.03, V2 = 4.0;
    const ThermalContext ctx(kT, hbar);
    AutocorrelationSeries gv;
    gv.times = uniform_grid(40.0 / gamma, 40001);
    for (double t : gv.times) gv.values.push_back(kT / m * std::exp(-gamma * t));
    gv.locate_first_zero();

    DiffusionInputs in;
    in.mass = m;
    in.v4 = 3.0 * std::pow(kT / m, 2);
    in.V2 = V2;
    const auto r = diffusion_lower_bound(gv, in, ctx);
    // exponential Green-Kubo integral
    CHECK(r.lhs == doctest::Approx(kT / (m * gamma)).epsilon(1e-6));
    // Gaussian moments inserted reproduce the semi-classical form
    const double semi = hbar * kT / (4.0 * std::sqrt(3.0) * m * std::sqrt(V2));
    CHECK(r.rhs == doctest::Approx(semi).epsilon(1e-12));
    CHECK(r.metadata["equipartition_form"].get<double>() == doctest::Approx(semi).epsilon(1e-12));
    CHECK(r.status == Status::satisfied);

    TransportInputs ti;
    ti.kind = TransportKind::diffusion;
    ti.G = gv;
    ti.yi_y = gv.values.front();
    ti.yi2_y2 = in.v4;
    ti.var_h = V2;
    const auto t = transport_lower_bound(ti, ctx);
    CHECK(std::abs(t.lhs - r.lhs) <= 1e-9 * std::abs(r.lhs));
    CHECK(std::abs(t.rhs - r.rhs) <= 1e-9 * std::abs(r.rhs));

    AutocorrelationSeries bad = gv;
    bad.values.front() = 0.0;
    CHECK_THROWS_AS(diffusion_lower_bound(bad, in, ctx), ContractError);
    CHECK(transport_kind_from_string("bulk_viscosity") == TransportKind::bulk_viscosity);
}

TEST_CASE("gradient bound") {
    const ThermalContext ctx(1.0);
    const auto samples = gaussian_samples(1, 2.0, 200000, 5);
    ScalarFunction c;
    c.kind = ScalarFunction::Kind::constant;
    CHECK(gradient_bound(samples, c, 0, 1.0, ctx).rhs == 0.0);

    // f = exp(-x^2/2 w^2) with x ~ N(0, s^2): <f'^2>/<f^2> = v / w^4, 1/v = 1/s^2 + 2/w^2
    ScalarFunction g;
    g.width = 3.0;
    const auto r = gradient_bound(samples, g, 0, 1.0, ctx);
    const double v = 1.0 / (1.0 / 4.0 + 2.0 / 9.0);
    CHECK(r.rhs == doctest::Approx(v / 81.0).epsilon(0.03));
    CHECK(r.status == Status::satisfied);
    CHECK(r.lhs == doctest::Approx(8.0 * M_PI / std::pow(thermal_wavelength(1.0, ctx), 2)).epsilon(1e-12));

    ScalarFunction tiny;
    tiny.value = 1e-8;
    CHECK_THROWS_AS(gradient_bound(samples, tiny, 0, 1.0, ctx), DegenerateError);
}

TEST_CASE("momentum power table") {
    const double m = 1.7;
    const ThermalContext ctx(0.9);
    const double mkT = m * 0.9;
    const auto rows = momentum_power_table(4, m, ctx);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].printed == doctest::Approx(2.0 * mkT));
    CHECK(rows[1].printed == doctest::Approx(2.0 * std::pow(2.0 * mkT, 2)));
    // Gaussian column: Var(p) = m kT, Var(p^2) = 2 (m kT)^2
    CHECK(rows[0].gaussian == doctest::Approx(mkT));
    CHECK(rows[1].gaussian == doctest::Approx(2.0 * mkT * mkT));
    CHECK(double_factorial(5) == 15);
    CHECK(double_factorial(0) == 1);
    CHECK(double_factorial(-1) == 1);
}

TEST_CASE("Ioffe-Regel") {
    CHECK(windowed_position_variance(1.0, 2.0) == doctest::Approx(4.0 / 12.0).epsilon(1e-10));
    for (double v : {0.3, 1.0, 7.0})
        for (double tau : {0.1, 2.0, 50.0})
            CHECK(std::abs(windowed_position_variance(v, tau) - v * v * tau * tau / 12.0) <= 1e-10 * v * v * tau * tau / 12.0);

    const auto r = ioffe_regel_check(2.0, {1.0, 2.0, 1.0}, ThermalContext(1.0));
    CHECK(r.status == Status::satisfied);
    CHECK(r.lhs == doctest::Approx(2.0));
    const auto z = ioffe_regel_check(2.0, {0.0, 2.0, 1.0}, ThermalContext(1.0));
    CHECK(z.status == Status::inconclusive);
    CHECK(z.metadata["k_undefined"].get<bool>());
    CHECK_THROWS_AS(ioffe_regel_check(0.0, {1.0, 2.0, 1.0}, ThermalContext(1.0)), ContractError);

    // argon at 100 K, 1 nm mean free path
    const double m = 39.948 * si::amu;
    const ThermalContext ar(100.0, si::hbar, si::kB);
    const double speed = std::sqrt(si::kB * 100.0 / m);
    const auto a = ioffe_regel_check(1e-9 / speed, {speed, 1e-9, m}, ar);
    CHECK(a.lhs == doctest::Approx(std::sqrt(m * si::kB * 100.0) / si::hbar * 1e-9).epsilon(1e-12));
    CHECK(a.lhs == doctest::Approx(90.7).epsilon(0.01));
    CHECK(a.status == Status::satisfied);
}

TEST_CASE("orthogonality time") {
    Eigendecomposition two;
    two.values = RVec(2);
    two.values << 0.0, 1.6;
    two.vectors = Mat::Identity(2, 2);
    Vec psi(2);
    psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const auto r = orthogonality_time_bound(two, psi, 1.0, 0.0);
    CHECK(r.lhs == doctest::Approx(M_PI / 1.6).epsilon(1e-9));
    CHECK(r.rhs == doctest::Approx(M_PI / 1.6).epsilon(1e-12));
    CHECK(r.status == Status::satisfied);

    Vec eigen = Vec::Zero(2);
    eigen(1) = 1.0;
    const auto s = orthogonality_time_bound(two, eigen, 1.0, 10.0);
    CHECK(s.status == Status::inconclusive);
    CHECK(s.satisfied == true);

    const auto f = orthogonality_fuzz(100, 8, 8);
    CHECK(f.violations == 0);
    CHECK(f.min_margin >= -1e-9);

    Vec un = Vec::Ones(2);
    CHECK_THROWS_AS(orthogonality_time_bound(two, un, 1.0, 1.0), ContractError);

    const XYChain chain({3, 1.0, true, 1.0});
    CanonicalEnsemble e(hermitian_eigh(chain.H()), ThermalContext(1.0));
    CHECK(!orthogonality_time_bound(e, 100.0).failed());
}

TEST_CASE("thermalization window") {
    const XYChain chain({4, 1.0, true, 1.0});
    const auto m = quantum_model(chain);
    const auto ctx = ThermalContext(1.0);
    CanonicalEnsemble e(m.eig, ctx);
    const auto s = make_site(m, "Sx_0", chain.site('x', 0));
    CHECK_THROWS_AS(thermalization_window_bound(m, canonical_probe(e), s, ctx), ContractError);

    const auto probe = tilted_probe(chain.H(), xy_tilt_operator(chain), 1.0, ctx);
    const auto r = thermalization_window_bound(m, probe, s, ctx);
    CHECK(r.status == Status::informational);
    CHECK(r.metadata["window_star_over_ref"].is_number());
    CHECK(!r.assertable());

    // n = 0, 1 superposition: <x(t)> oscillates around 0, the window average decays like 1/(w T)
    const auto osc = oscillator(30);
    const auto mo = quantum_model(osc);
    Vec psi = Vec::Zero(osc.H.dim());
    psi(0) = psi(1) = 1.0 / std::sqrt(2.0);
    ProbeState sup;
    sup.kind = ProbeKind::filtered_pure;
    sup.rho = DensityMatrix::from_pure(psi);
    const auto so = make_site(mo, "x", osc.x);
    const auto ro = thermalization_window_bound(mo, sup, so, ctx);
    CHECK(ro.metadata["diagonal_average"].get<double>() == doctest::Approx(0.0).scale(1.0));
    const double star = ro.metadata["window_star_over_ref"].get<double>() * ro.metadata["ref_time"].get<double>();
    // |sin(T)/T| <= 0.1 for every T beyond the located window, so T* is at most 10
    CHECK(star <= 10.0 * 1.05);
    CHECK(star > 1.0);
}

TEST_CASE("reflection positivity") {
    IsingLatticeSpec sq;
    const auto r = reflection_positivity_audit(sq, 0.4);
    CHECK(r.status == Status::satisfied);
    CHECK(r.metadata["min_covariance"].get<double>() >= -1e-12);
    CHECK(r.lhs >= r.rhs);

    IsingLatticeSpec af;
    af.J = -1.0;
    CHECK_THROWS_AS(reflection_positivity_audit(af, 0.4), ContractError);

    // two independent modes: Var(H) = sum of the mode variances
    const auto osc = oscillator(12);
    const auto I = DenseOperator::identity(osc.H.dim());
    std::vector<HamiltonianTerm> terms{{"mode0", tensor_product(osc.H, I)}, {"mode1", tensor_product(I, osc.H.scaled(1.3))}};
    const auto H = terms[0].op + terms[1].op;
    CanonicalEnsemble e(hermitian_eigh(H), ThermalContext(1.0));
    const auto d = reflection_positivity_audit(terms, e, true);
    CHECK(d.status == Status::satisfied);
    CHECK(std::abs(d.lhs - d.rhs) <= 1e-9 * std::max(1.0, d.lhs));

    const XYChain chain({4, 1.0, true, 1.0});
    CanonicalEnsemble ex(hermitian_eigh(chain.H()), ThermalContext(1.0));
    const auto x = reflection_positivity_audit(chain.terms(), ex, false);
    CHECK(x.status == Status::informational);
    CHECK(x.metadata["min_covariance"].is_number());
}

TEST_CASE("power-law fits and temperature scaling") {
    std::vector<double> x, y;
    for (int k = 0; k < 10; ++k) {
        x.push_back(std::pow(10.0, 0.2 * k));
        y.push_back(3.0 * std::pow(x.back(), 2.5));
    }
    const auto fit = fit_power_law(x, y);
    CHECK(fit.exponent == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<double> lo, hi, gap;
    for (int k = 0; k <= 10; ++k) {
        lo.push_back(1e-3 * std::pow(10.0, 0.1 * k));
        hi.push_back(20.0 * std::pow(10.0, 0.1 * k));
        gap.push_back(0.02 * std::pow(10.0, 0.1 * k));
    }
    FermiGasSpec fs;
    const auto f = lowT_highT_scaling("fermi_gas", lo, fermi_gas_sqrt_variance(fs, lo), ScalingRegime::low_T);
    CHECK(f.status == Status::satisfied);
    CHECK(f.metadata["exponent"].get<double>() == doctest::Approx(1.5).epsilon(0.05 / 1.5));

    OscillatorSpec os;
    os.n_max = 60;
    const auto h = lowT_highT_scaling("oscillator_kinetic", hi, oscillator_sqrt_variance(os, hi, true), ScalingRegime::high_T);
    CHECK(h.status == Status::satisfied);
    CHECK(std::abs(h.metadata["exponent"].get<double>() - 1.0) <= 0.05);

    const auto g = lowT_highT_scaling("oscillator_full", gap, oscillator_sqrt_variance(os, gap, false), ScalingRegime::low_T);
    CHECK(g.status == Status::satisfied);
    CHECK(g.metadata["exponent"].get<double>() > 1.5);

    CHECK_THROWS_AS(lowT_highT_scaling("x", {1.0, 2.0, 3.0}, {1.0, 2.0, 3.0}, ScalingRegime::high_T), ContractError);
}

TEST_CASE("ETH off-diagonal experiment") {
    const XYChain chain({6, 1.0, true, 1.0});
    const auto eig = hermitian_eigh(chain.H());
    for (Eigen::Index n : {0, 10, 63})
        CHECK(std::abs(heisenberg_derivative(chain.H(), chain.site('x', 0), DensityMatrix::from_pure(eig.vectors.col(n)),
                                             1.0)) < 1e-12);

    // two-level coherent superposition: O(1) rate
    Vec psi(2);
    psi << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const auto h2 = pauli::z().scaled(0.5);
    CHECK(std::abs(heisenberg_derivative(h2, pauli::y(), DensityMatrix::from_pure(psi), 1.0)) == doctest::Approx(1.0));

    const auto r = eth_offdiagonal_experiment({6, 8, 10}, 32, 1);
    CHECK(r.status == Status::satisfied);
    CHECK(r.metadata["slope"].get<double>() == doctest::Approx(-1.0).epsilon(0.3));
    const auto small = eth_offdiagonal_experiment({4, 5}, 8, 1);
    CHECK(small.status == Status::inconclusive);
    CHECK(eth_offdiagonal_experiment({6, 8, 10}, 32, 1).metadata["slope"] == r.metadata["slope"]);
}
