#include "oracles.hpp"
#include "tub/dynamics.hpp"
#include "tub/errors.hpp"
#include "tub/models.hpp"
#include "tub/probes.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace tub;

namespace {

Vec random_state(int d, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> n;
    Vec v(d);
    for (int i = 0; i < d; ++i) v(i) = cplx(n(g), n(g));
    return v / v.norm();
}

// <Q(t)> by brute force: psi(t) = V e^{-iEt} V^dag psi
double brute_expectation(const Mat& h, const Mat& rho, const Mat& q, double t) {
    const Eigen::SelfAdjointEigenSolver<Mat> es(h);
    Vec ph(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::exp(cplx(0, -es.eigenvalues()(k) * t));
    const Mat u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    return (u * rho * u.adjoint() * q).trace().real();
}

} // namespace

TEST_CASE("local Hamiltonian selection") {
    OscillatorSpec sp;
    sp.n_max = 30;
    const auto osc = build_oscillator(sp);
    const auto sel = select_local_hamiltonian(osc.terms(), osc.x, SelectionMode::minimal, {}, &osc.H, osc.valid_block());
    REQUIRE(sel.selected_labels().size() == 1);
    CHECK(sel.selected_labels()[0] == "kinetic");

    // Q = H with mutually commuting terms: nothing is selected
    const auto z0 = tensor_product(pauli::z(), pauli::id()), z1 = tensor_product(pauli::id(), pauli::z());
    const std::vector<HamiltonianTerm> diag = {{"z0", z0}, {"z1", z1.scaled(0.4)}};
    const auto hd = z0 + z1.scaled(0.4);
    const auto all = select_local_hamiltonian(diag, hd, SelectionMode::minimal, {}, &hd);
    CHECK(all.selected.empty());
    CHECK(max_abs(all.local().matrix()) == 0.0);

    const XYChain chain({4, 1.0, true, 1.0});

    // brute-force commutator scan for S^x_2
    const auto q = chain.site('x', 2);
    std::vector<std::string> want;
    for (const auto& t : chain.terms())
        if (max_abs(commutator(t.op, q).matrix()) > 1e-12) want.push_back(t.label);
    const auto s2 = select_local_hamiltonian(chain.terms(), q, SelectionMode::minimal, {}, &chain.H());
    auto got = s2.selected_labels();
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
    const std::vector<std::string> expect = {"yy(1,2)", "yy(2,3)"};
    CHECK(got == expect);
    // the selection reproduces [H, Q]
    CHECK((commutator(s2.local(), q).matrix() - commutator(chain.H(), q).matrix()).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((s2.total().matrix() - chain.H().matrix()).cwiseAbs().maxCoeff() < 1e-10);

    // augmented mode pulls in the named commuting terms
    const auto aug = select_local_hamiltonian(chain.terms(), q, SelectionMode::augmented, {"xx(1,2)"}, &chain.H());
    CHECK(aug.selected.size() == 3);

    // terms that do not sum to H are rejected
    const auto terms = chain.terms();
    std::vector<HamiltonianTerm> partial(terms.begin(), terms.begin() + 2);
    CHECK_THROWS(select_local_hamiltonian(partial, q, SelectionMode::minimal, {}, &chain.H()));
}

TEST_CASE("heisenberg derivative") {
    const double w = 1.3;
    const DenseOperator h = pauli::z().scaled(0.5 * w);
    Vec plus(2);
    plus << std::sqrt(0.5), std::sqrt(0.5);
    const auto rho = DensityMatrix::from_pure(plus);
    CHECK(heisenberg_derivative(h, pauli::x(), rho, 1.0) == doctest::Approx(0.0));
    CHECK(heisenberg_derivative(h, pauli::y(), rho, 1.0) == doctest::Approx(w).epsilon(1e-12));
    // <sigma^y(t)> = sin(wt) for this state, so the slope at 0 is +w
    CHECK(brute_expectation(h.matrix(), rho.matrix(), pauli::y().matrix(), 1e-6) / 1e-6 == doctest::Approx(w).epsilon(1e-6));

    const XYChain chain({4, 1.0, true, 1.0});
    const auto eig = hermitian_eigh(chain.H());
    CanonicalEnsemble can(eig, ThermalContext(1.0));
    const auto q = chain.site('x', 1);
    CHECK(std::abs(heisenberg_derivative(chain.H(), q, canonical_density(can), 1.0)) < 1e-10);

    // tilted thermal state, against a central finite difference of <Q(t)>
    const auto probe = tilted_probe(chain.H(), xy_tilt_operator(chain), 0.1, ThermalContext(1.0));
    const double dt = 1e-5;
    const Mat hm = oracle::xy_hamiltonian(4, 1.0, true);
    const Mat qm = oracle::spin(oracle::sx(), 1, 4);
    const double fd = (brute_expectation(hm, probe.rho.matrix(), qm, dt) - brute_expectation(hm, probe.rho.matrix(), qm, -dt)) / (2 * dt);
    const double rate = heisenberg_derivative(chain.H(), q, probe.rho, 1.0);
    CHECK(std::abs(rate - fd) <= 1e-6);
    CHECK(std::abs(rate) > 1e-4);
    const auto sel = select_local_hamiltonian(chain.terms(), q, SelectionMode::minimal, {}, &chain.H());
    CHECK(heisenberg_derivative(sel, q, probe.rho, 1.0) == doctest::Approx(rate).epsilon(1e-12));

    // property: evolved expectation differentiates to the rate
    const double ev = (evolved_expectation(probe.rho, q, eig, dt, 1.0) - evolved_expectation(probe.rho, q, eig, -dt, 1.0)) / (2 * dt);
    CHECK(std::abs(ev - rate) <= 1e-6);
}

TEST_CASE("autocorrelation") {
    OscillatorSpec sp;
    sp.omega = 1.0;
    sp.n_max = 60;
    const auto osc = build_oscillator(sp);
    CanonicalEnsemble e(hermitian_eigh(osc.H), ThermalContext::from_beta(1.0));
    const auto grid = uniform_grid(6.0, 121);
    const auto g = autocorrelation(e, osc.x, grid);
    // Re G(t) = <x^2> cos(wt) for the exact harmonic spectrum
    const double x2 = 0.5 / std::tanh(0.5);
    for (std::size_t k = 0; k < grid.size(); k += 10) CHECK(g.values[k] == doctest::Approx(x2 * std::cos(grid[k])).epsilon(1e-9));
    CHECK(g.values[0] == doctest::Approx(thermal_expectation(e, osc.x * osc.x)).epsilon(1e-10));
    REQUIRE(g.first_zero.has_value());
    CHECK(*g.first_zero == doctest::Approx(M_PI / 2).epsilon(1e-3));

    const auto flat = autocorrelation(e, DenseOperator::identity(osc.H.dim()).scaled(2.0), grid);
    for (double v : flat.values) CHECK(v == doctest::Approx(4.0));
    CHECK_FALSE(flat.first_zero.has_value());
    CHECK(flat.no_zero_warning);

    // property: G(t) = G(-t), and the slope at 0 vanishes; negative times by direct evolution
    const XYChain chain({4, 1.0, true, 1.0});
    const auto xe = hermitian_eigh(chain.H());
    CanonicalEnsemble ce(xe, ThermalContext(0.7));
    const auto q = chain.site('x', 0);
    const Mat rc = canonical_density(ce).matrix();
    auto G = [&](double t) { return (rc * evolve_unitary(q, xe, t, 1.0).matrix() * q.matrix()).trace().real(); };
    const auto gs = autocorrelation(ce, q, {0.0, 1e-6, 0.3, 0.9});
    CHECK(gs.values[3] == doctest::Approx(G(-0.9)).epsilon(1e-9));
    CHECK(gs.values[2] == doctest::Approx(G(-0.3)).epsilon(1e-9));
    CHECK(std::abs(gs.values[1] - G(-1e-6)) / 2e-6 <= 1e-9);
}

TEST_CASE("first zero and trapezoid") {
    AutocorrelationSeries s;
    s.times = {0, 1, 2, 3};
    s.values = {1.0, 0.5, -0.5, -1.0};
    s.locate_first_zero();
    REQUIRE(s.first_zero.has_value());
    CHECK(*s.first_zero == doctest::Approx(1.5));
    CHECK(trapezoid(s.times, s.values, 1.5) == doctest::Approx(0.75 + 0.125));
    CHECK(trapezoid({0, 1}, {0, 0}, 1.0) == 0.0);
    const auto g = uniform_grid(2.0, 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 2.0);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);
}

TEST_CASE("diagonal ensemble and windowed averages") {
    const XYChain chain({4, 1.0, true, 1.0});
    const auto q = chain.site('x', 0);
    // the XY spectrum is degenerate; diagonalize Q inside each block first
    const auto eig = resolve_degeneracies(hermitian_eigh(chain.H()), q);
    CanonicalEnsemble can(eig, ThermalContext(1.0));
    const auto rho_can = canonical_density(can);
    CHECK(diagonal_ensemble_average(rho_can, q, eig) == doctest::Approx(thermal_expectation(can, q)).epsilon(1e-10));
    CHECK(windowed_average(rho_can, q, eig, 3.0, 1.0) == doctest::Approx(thermal_expectation(can, q)).epsilon(1e-10));

    // eigenstate projector returns Q_nn (nondegenerate level)
    RVec h2(3);
    h2 << 0.0, 1.0, 2.7;
    const auto e3 = hermitian_eigh(DenseOperator::diagonal(h2));
    Mat qa(3, 3);
    qa << 0.3, 1.0, 0.2, 1.0, -0.4, 0.5, 0.2, 0.5, 0.9;
    Vec v1 = Vec::Zero(3);
    v1(1) = 1.0;
    CHECK(diagonal_ensemble_average(DensityMatrix::from_pure(v1), DenseOperator(qa, true), e3) == doctest::Approx(-0.4));

    // random pure state: long-window average against quadrature of <Q(t)>
    const Vec psi = random_state(16, 77);
    const auto rho = DensityMatrix::from_pure(psi);
    // quadrature oracle: <Q(t)> = sum_mn rho_mn Q_nm e^{i(E_m - E_n)t} from a separate solver
    const Eigen::SelfAdjointEigenSolver<Mat> es(oracle::xy_hamiltonian(4, 1.0, true));
    const Mat V = es.eigenvectors();
    const Mat re = V.adjoint() * rho.matrix() * V, qe = V.adjoint() * q.matrix() * V;
    const Eigen::VectorXd E = es.eigenvalues();
    const double T = 1e4;
    const int n = 400000;
    double quad = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double t = T * k / n;
        Vec ph(16);
        for (int m = 0; m < 16; ++m) ph(m) = std::exp(cplx(0, -E(m) * t));
        const double val = (ph.asDiagonal() * re * ph.conjugate().asDiagonal() * qe).trace().real();
        quad += ((k == 0 || k == n) ? 0.5 : 1.0) * val;
    }
    quad /= n;
    CHECK(windowed_average(rho, q, eig, T, 1.0) == doctest::Approx(quad).epsilon(1e-3));
    CHECK(std::abs(windowed_average(rho, q, eig, T, 1.0) - quad) <= 1e-3);

    // limits
    CHECK(windowed_average(rho, q, eig, 1e-9, 1.0) == doctest::Approx(expectation(rho, q)).epsilon(1e-6));
    const double diag = diagonal_ensemble_average(rho, q, eig);
    CHECK(std::abs(windowed_average(rho, q, eig, 1e8, 1.0) - diag) < 1e-6);
}

TEST_CASE("property: exact-phase window average matches trapezoid quadrature") {
    std::mt19937_64 g(19);
    std::normal_distribution<double> nd;
    for (int d : {4, 16, 64}) {
        Mat a(d, d), b(d, d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) {
                a(i, j) = cplx(nd(g), nd(g));
                b(i, j) = cplx(nd(g), nd(g));
            }
        const DenseOperator h(0.5 * (a + a.adjoint()), true), q(0.5 * (b + b.adjoint()), true);
        const auto eig = hermitian_eigh(h);
        const auto rho = DensityMatrix::from_pure(random_state(d, 100 + d));
        const double T = 3.0;
        const int n = 6000;
        double quad = 0.0;
        for (int k = 0; k <= n; ++k) quad += ((k == 0 || k == n) ? 0.5 : 1.0) * evolved_expectation(rho, q, eig, T * k / n, 1.0);
        quad /= n;
        CHECK(std::abs(windowed_average(rho, q, eig, T, 1.0) - quad) <= 1e-6);
    }
}

TEST_CASE("long-time mean square") {
    // two-level: <Q(t)> = cos(wt) for sigma^x, |+x>; mean square 1/2
    const DenseOperator h = pauli::z().scaled(0.5);
    Vec plus(2);
    plus << std::sqrt(0.5), std::sqrt(0.5);
    const auto eig = hermitian_eigh(h);
    CHECK(long_time_mean_square(DensityMatrix::from_pure(plus), pauli::x(), eig, 1.0) == doctest::Approx(0.5));
}

TEST_CASE("degeneracy resolution") {
    RVec d(3);
    d << 0.0, 0.0, 1.0;
    const auto e = hermitian_eigh(DenseOperator::diagonal(d));
    Mat q = Mat::Zero(3, 3);
    q(0, 1) = q(1, 0) = 1.0;
    const auto r = resolve_degeneracies(e, DenseOperator(q, true));
    const Mat qe = r.to_eigenbasis(q);
    CHECK(std::abs(qe(0, 1)) < 1e-12);
    CHECK(std::abs(std::abs(qe(0, 0).real()) - 1.0) < 1e-12);
}
