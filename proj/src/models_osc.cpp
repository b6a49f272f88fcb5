// models_osc.cpp - truncated harmonic mode and its closed forms
#include "tub/errors.hpp"
#include "tub/models.hpp"

#include <cmath>

namespace tub {

void OscillatorSpec::validate() const {
    if (!(omega > 0) || !(mass > 0)) throw ContractError("oscillator: omega and mass must be positive");
    if (n_max < 8) throw ContractError("oscillator: n_max must be at least 8");
    if (!(hbar > 0)) throw ContractError("oscillator: hbar must be positive");
}

OscillatorModel build_oscillator(const OscillatorSpec& spec) {
    spec.validate();
    const int d = spec.n_max + 1;
    Mat a = Mat::Zero(d, d);
    for (int k = 1; k < d; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    const Mat ad = a.adjoint();
    const double x0 = std::sqrt(spec.hbar / (2.0 * spec.mass * spec.omega));
    const double p0 = std::sqrt(spec.hbar * spec.mass * spec.omega / 2.0);
    Mat x = x0 * (a + ad);
    Mat p = cplx(0.0, p0) * (ad - a);
    RVec nd(d), hd(d);
    for (int k = 0; k < d; ++k) {
        nd(k) = k;
        hd(k) = spec.hbar * spec.omega * (k + 0.5);
    }
    OscillatorModel m;
    m.spec = spec;
    m.a = DenseOperator(a, false);
    m.x = DenseOperator(x, true);
    m.p = DenseOperator(p, true);
    m.n = DenseOperator::diagonal(nd);
    m.H = DenseOperator::diagonal(hd);
    // p^2 is formed one level up and compressed back, so kinetic + potential is
    // exactly diagonal hbar w (n + 1/2) on every retained level.
    Mat ab = Mat::Zero(d + 1, d + 1);
    for (int k = 1; k <= d; ++k) ab(k - 1, k) = std::sqrt(static_cast<double>(k));
    const Mat pb = cplx(0.0, p0) * (ab.adjoint() - ab);
    Mat kin = (pb * pb).topLeftCorner(d, d) / (2.0 * spec.mass);
    kin = 0.5 * (kin + kin.adjoint());
    m.kinetic = DenseOperator(kin, true);
    Mat pot = m.H.matrix() - kin;
    m.potential = DenseOperator(pot, true);
    return m;
}

namespace osc {

double partition(double bx) { return std::exp(-bx / 2.0) / (1.0 - std::exp(-bx)); }

double mean_n(double bx) { return 1.0 / std::expm1(bx); }

double mean_n2(double bx) {
    const double em = std::expm1(bx);
    return std::exp(bx) / (em * em) + 1.0 / (em * em);
}

double kinetic_variance(double hw, double bx) {
    const double c = 1.0 / std::tanh(bx / 2.0);
    return hw * hw / 8.0 * c * c;
}

double internal_energy(double hw, double bx) { return hw * (mean_n(bx) + 0.5); }

double einstein_capacity(double bx) {
    const double em = std::expm1(bx);
    return bx * bx * std::exp(bx) / (em * em);
}

} // namespace osc
} // namespace tub
