#include "oracles.hpp"
#include "tub/constants.hpp"
#include "tub/ensemble.hpp"
#include "tub/models.hpp"

#include <doctest.h>

#include <cmath>

using namespace tub;

namespace {

Eigendecomposition eig_of(const Mat& h) { return hermitian_eigh(DenseOperator(h, true)); }

OscillatorModel oscillator(int n_max, double omega = 1.0) {
    OscillatorSpec sp;
    sp.n_max = n_max;
    sp.omega = omega;
    return build_oscillator(sp);
}

} // namespace

TEST_CASE("canonical density") {
    RVec one(1);
    one << 0.0;
    CanonicalEnsemble single(hermitian_eigh(DenseOperator::diagonal(one)), ThermalContext(1.0));
    CHECK(canonical_density(single).matrix()(0, 0).real() == doctest::Approx(1.0));

    // large beta on a gapped spectrum gives the ground projector
    RVec gap(3);
    gap << 0.0, 1.0, 2.5;
    CanonicalEnsemble cold(hermitian_eigh(DenseOperator::diagonal(gap)), ThermalContext::from_beta(40.0));
    Mat p0 = Mat::Zero(3, 3);
    p0(0, 0) = 1.0;
    CHECK((canonical_density(cold).matrix() - p0).cwiseAbs().maxCoeff() < 1e-8);

    // oscillator populations e^{-b n}(1 - e^{-b})
    const auto osc = oscillator(60);
    const double b = 0.8;
    CanonicalEnsemble e(hermitian_eigh(osc.H), ThermalContext::from_beta(b));
    const Mat r = canonical_density(e).matrix();
    for (int n = 0; n < 10; ++n) CHECK(r(n, n).real() == doctest::Approx(std::exp(-b * n) * (1 - std::exp(-b))).epsilon(1e-12));
}

TEST_CASE("thermal expectation values") {
    const auto osc = oscillator(80);
    for (double b : {0.5, 1.0, 2.0, 5.0}) {
        CanonicalEnsemble e(hermitian_eigh(osc.H), ThermalContext::from_beta(b));
        const double nb = 1.0 / std::expm1(b);
        CHECK(thermal_expectation(e, osc.n) == doctest::Approx(nb).epsilon(1e-8));
        const double n2 = std::exp(b) / std::pow(std::expm1(b), 2) + 1.0 / std::pow(std::expm1(b), 2);
        CHECK(thermal_expectation(e, osc.n * osc.n) == doctest::Approx(n2).epsilon(1e-8));
        CHECK(thermal_expectation(e, DenseOperator::identity(osc.H.dim())) == doctest::Approx(1.0));
    }

    // <S^x_1> on the XY chain against an explicit Boltzmann sum
    const XYChain chain({4, 1.0, true, 1.0});
    CanonicalEnsemble e(hermitian_eigh(chain.H()), ThermalContext(1.0));
    const Mat h = oracle::xy_hamiltonian(4, 1.0, true);
    const Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const Mat q = oracle::spin(oracle::sx(), 1, 4);
    double num = 0.0, z = 0.0;
    for (int n = 0; n < 16; ++n) {
        const double w = std::exp(-es.eigenvalues()(n));
        num += w * (es.eigenvectors().col(n).adjoint() * q * es.eigenvectors().col(n))(0, 0).real();
        z += w;
    }
    CHECK(thermal_expectation(e, chain.site('x', 1)) == doctest::Approx(num / z).epsilon(1e-12));
}

TEST_CASE("thermal variances") {
    const auto osc = oscillator(80);
    for (double b : {0.5, 1.0, 2.0, 5.0}) {
        CanonicalEnsemble e(hermitian_eigh(osc.H), ThermalContext::from_beta(b));
        const double c = 1.0 / std::tanh(b / 2);
        CHECK(thermal_variance(e, osc.kinetic) == doctest::Approx(c * c / 8.0).epsilon(1e-8));
        // half the squared internal energy
        const double U = 1.0 / std::expm1(b) + 0.5;
        CHECK(thermal_variance(e, osc.kinetic) == doctest::Approx(0.5 * U * U).epsilon(1e-8));
    }
    RVec one(1);
    one << 2.0;
    CanonicalEnsemble e1(hermitian_eigh(DenseOperator::diagonal(one)), ThermalContext(1.0));
    CHECK(thermal_variance(e1, DenseOperator::diagonal(one)) == doctest::Approx(0.0));
}

TEST_CASE("property: ln Z derivatives give energy moments") {
    const XYChain chain({5, 1.0, true, 1.0});
    const auto eig = hermitian_eigh(chain.H());
    for (double b : {0.3, 0.7, 1.0, 2.0, 3.5}) {
        CanonicalEnsemble e(eig, ThermalContext::from_beta(b));
        const double h = 1e-4;
        const double d1 = (log_partition(eig.values, b + h) - log_partition(eig.values, b - h)) / (2 * h);
        CHECK(-d1 == doctest::Approx(e.mean_energy()).epsilon(1e-6));
        const double h2 = 1e-3;
        const double d2 = (log_partition(eig.values, b + h2) - 2 * log_partition(eig.values, b) +
                           log_partition(eig.values, b - h2)) /
                          (h2 * h2);
        CHECK(d2 == doctest::Approx(e.energy_variance()).epsilon(1e-5));
    }
}

TEST_CASE("heat capacities") {
    const auto osc = oscillator(80);
    const auto eig = hermitian_eigh(osc.H);
    for (double b : {0.5, 1.0, 3.0}) {
        CanonicalEnsemble e(eig, ThermalContext::from_beta(b));
        const auto full = effective_heat_capacity(e, osc.H);
        const auto thermo = thermodynamic_heat_capacity(e);
        CHECK(full.value == doctest::Approx(thermo.value).epsilon(1e-12));
        // Einstein form
        CHECK(full.value == doctest::Approx(b * b * std::exp(b) / std::pow(std::expm1(b), 2)).epsilon(1e-8));
        // number-operator route: (hw)^2 Var(n)/(kB T^2)
        const double varn = thermal_variance(e, osc.n);
        CHECK(full.value == doctest::Approx(varn * b * b).epsilon(1e-10));
        CHECK(full.value >= 0.0);
    }
    // kinetic H~ at high T approaches kB/2
    CanonicalEnsemble hot(eig, ThermalContext::from_beta(0.2));
    CHECK(effective_heat_capacity(hot, osc.kinetic).value == doctest::Approx(0.5).epsilon(0.01));

    // gapped spectrum (the oscillator, gap 1): C_v/T^2 stays bounded as T -> 0 and in fact vanishes
    double prev = 1e300;
    for (double T : {0.1, 0.05, 0.025, 0.0125}) {
        CanonicalEnsemble e(eig, ThermalContext(T));
        const double c = thermodynamic_heat_capacity(e).value;
        CHECK(c >= 0.0);
        CHECK(c / (T * T) <= prev * 1.0001 + 1e-300);
        prev = c / (T * T);
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("property: chain average of a symmetric sum") {
    const XYChain chain({6, 1.0, true, 1.0});
    CanonicalEnsemble e(hermitian_eigh(chain.H()), ThermalContext(0.8));
    DenseOperator total = DenseOperator::zero(chain.dim());
    for (int i = 0; i < 6; ++i) total = total + chain.site('z', i) * chain.site('z', (i + 1) % 6);
    const double single = thermal_expectation(e, chain.site('z', 2) * chain.site('z', 3));
    CHECK(thermal_expectation(e, total) == doctest::Approx(6 * single).epsilon(1e-10));
}

TEST_CASE("fermi occupation variance") {
    const ThermalContext c(1.0);
    // eps = mu gives eps^2/4
    CHECK(fermi_occupation_variance(2.0, 2.0, c) == doctest::Approx(1.0));
    CHECK(fermi_occupation_variance(2.0, 1.0, ThermalContext(1e-3)) == doctest::Approx(0.0));
    const double e = std::exp(1.0);
    CHECK(fermi_occupation_variance(3.0, 2.0, c) == doctest::Approx(9.0 * e / ((1 + e) * (1 + e))).epsilon(1e-12));
    CHECK(e / ((1 + e) * (1 + e)) == doctest::Approx(0.1966).epsilon(1e-3));
    CHECK(fermi_function(2.0, 2.0, c) == doctest::Approx(0.5));
}

TEST_CASE("thermal wavelength and Planckian time") {
    const ThermalContext room(300.0, si::hbar, si::kB);
    const double m = 5.31e-26;
    CHECK(thermal_wavelength(m, room) == doctest::Approx(1.8e-11).epsilon(0.05));
    CHECK(thermal_wavelength(4 * m, room) == doctest::Approx(thermal_wavelength(m, room) / 2).epsilon(1e-12));
    const ThermalContext hot(1200.0, si::hbar, si::kB);
    CHECK(thermal_wavelength(m, hot) == doctest::Approx(thermal_wavelength(m, room) / 2).epsilon(1e-12));

    CHECK(planckian_time(room) == doctest::Approx(2.5e-14).epsilon(0.02));
    const ThermalContext twice(600.0, si::hbar, si::kB);
    CHECK(planckian_time(twice) == doctest::Approx(planckian_time(room) / 2).epsilon(1e-12));
    CHECK(planckian_time(ThermalContext(1.0)) == doctest::Approx(1.0));
}

TEST_CASE("reference constants") {
    CHECK(planckian_time_si(300.0) == doctest::Approx(2.5e-14).epsilon(0.02));
    CHECK(n_hbar_si(3.34e28) == doctest::Approx(3.5e-6).epsilon(0.03));
    CHECK(thermal_wavelength_si(31.998 * si::amu, 300.0) == doctest::Approx(1.8e-11).epsilon(0.05));
    const auto natural = constants(UnitsMode::natural);
    CHECK(natural.hbar == 1.0);
    CHECK(natural.kB == 1.0);
    const auto s = constants(UnitsMode::si);
    CHECK(s.hbar == si::hbar);
    CHECK(s.kB == si::kB);
    // argon reduced units: hbar / (sigma sqrt(m eps))
    const auto ar = argon_units();
    const double want = si::hbar / (ar.sigma_m * std::sqrt(ar.mass_kg * ar.epsilon_J));
    CHECK(ar.hbar_reduced() == doctest::Approx(want).epsilon(1e-14));
    CHECK(ar.temperature_K(1.0) == doctest::Approx(119.8).epsilon(1e-12));
}
