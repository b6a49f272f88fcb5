// ensemble.cpp - canonical averages, heat capacities, closed forms
#include "tub/ensemble.hpp"
#include "tub/errors.hpp"

#include <cmath>
#include <numbers>

namespace tub {

ThermalContext::ThermalContext(double T_, double hbar_, double kB_) : T(T_), hbar(hbar_), kB(kB_) {
    if (!(T > 0) || !(hbar > 0) || !(kB > 0))
        throw ContractError("thermal context requires T, hbar, kB > 0");
}

ThermalContext ThermalContext::from_beta(double beta, double hbar, double kB) {
    if (!(beta > 0)) throw ContractError("beta must be positive");
    return ThermalContext(1.0 / (kB * beta), hbar, kB);
}

double log_partition(const RVec& energies, double beta) {
    if (energies.size() == 0) throw ContractError("empty spectrum");
    const double e0 = energies.minCoeff();
    double s = 0.0;
    for (Eigen::Index k = 0; k < energies.size(); ++k) s += std::exp(-beta * (energies(k) - e0));
    return std::log(s) - beta * e0;
}

CanonicalEnsemble::CanonicalEnsemble(Eigendecomposition h, ThermalContext ctx) : h_(std::move(h)), ctx_(ctx) {
    const double beta = ctx_.beta();
    const Eigen::Index n = h_.dim();
    if (n == 0) throw ContractError("empty spectrum");
    const double e0 = h_.values.minCoeff();
    p_.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) p_(k) = std::exp(-beta * (h_.values(k) - e0));
    const double s = p_.sum();
    p_ /= s;
    log_z_ = std::log(s) - beta * e0;
}

double CanonicalEnsemble::z() const { return std::exp(log_z_); }

double CanonicalEnsemble::mean_energy() const { return p_.dot(h_.values); }

double CanonicalEnsemble::energy_variance() const {
    const double m = mean_energy();
    double v = 0.0;
    for (Eigen::Index k = 0; k < p_.size(); ++k) v += p_(k) * (h_.values(k) - m) * (h_.values(k) - m);
    return v;
}

DensityMatrix canonical_density(const CanonicalEnsemble& e) {
    const auto& h = e.hamiltonian();
    Mat r = h.vectors * e.weights().cast<cplx>().asDiagonal() * h.vectors.adjoint();
    r = 0.5 * (r + r.adjoint());
    return DensityMatrix(DenseOperator(std::move(r), true));
}

cplx thermal_expectation_eigenbasis(const CanonicalEnsemble& e, const Mat& a_eig) {
    return (e.weights().cast<cplx>().array() * a_eig.diagonal().array()).sum();
}

static RVec diag_in_eigenbasis(const Eigendecomposition& h, const Mat& a) {
    // (V^dag A V)_kk = sum_ij conj(V_ik) A_ij V_jk
    Mat av = a * h.vectors;
    RVec d(h.dim());
    for (Eigen::Index k = 0; k < h.dim(); ++k) d(k) = h.vectors.col(k).dot(av.col(k)).real();
    return d;
}

double thermal_expectation(const CanonicalEnsemble& e, const DenseOperator& q) {
    if (q.dim() != e.hamiltonian().dim()) throw ShapeError("thermal_expectation: dimension mismatch");
    return e.weights().dot(diag_in_eigenbasis(e.hamiltonian(), q.matrix()));
}

double thermal_variance(const CanonicalEnsemble& e, const DenseOperator& q) {
    if (q.dim() != e.hamiltonian().dim()) throw ShapeError("thermal_variance: dimension mismatch");
    // Work with the centered operator to avoid cancellation.
    const double m = thermal_expectation(e, q);
    Mat c = q.matrix();
    c.diagonal().array() -= m;
    // <c^2>_kk = || c v_k ||^2 for Hermitian c
    Mat cv = c * e.hamiltonian().vectors;
    double v = 0.0;
    for (Eigen::Index k = 0; k < cv.cols(); ++k) v += e.weights()(k) * cv.col(k).squaredNorm();
    return v;
}

HeatCapacityResult effective_heat_capacity(const CanonicalEnsemble& e, const DenseOperator& h_local) {
    HeatCapacityResult r;
    r.variance = std::max(0.0, thermal_variance(e, h_local));
    r.value = r.variance / (e.context().kB * e.context().T * e.context().T);
    r.kind = HeatCapacityKind::effective_local;
    return r;
}

HeatCapacityResult thermodynamic_heat_capacity(const CanonicalEnsemble& e) {
    HeatCapacityResult r;
    r.variance = std::max(0.0, e.energy_variance());
    r.value = r.variance / (e.context().kB * e.context().T * e.context().T);
    r.kind = HeatCapacityKind::thermodynamic;
    return r;
}

double fermi_function(double eps, double mu, const ThermalContext& ctx) {
    const double x = (eps - mu) / ctx.kT();
    // stable for large |x|
    if (x > 0) {
        const double ex = std::exp(-x);
        return ex / (1.0 + ex);
    }
    return 1.0 / (1.0 + std::exp(x));
}

double fermi_occupation_variance(double eps, double mu, const ThermalContext& ctx) {
    const double f = fermi_function(eps, mu, ctx);
    return eps * eps * f * (1.0 - f);
}

double thermal_wavelength(double m, const ThermalContext& ctx) {
    if (!(m > 0)) throw ContractError("thermal_wavelength: mass must be positive");
    return std::sqrt(2.0 * std::numbers::pi * ctx.hbar * ctx.hbar / (m * ctx.kT()));
}

double planckian_time(const ThermalContext& ctx) { return ctx.hbar / ctx.kT(); }

} // namespace tub
