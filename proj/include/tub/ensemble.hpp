#pragma once
// Canonical-ensemble machinery.
#include "tub/operators.hpp"

namespace tub {

struct ThermalContext {
    double T = 1.0;
    double hbar = 1.0;
    double kB = 1.0;

    ThermalContext() = default;
    ThermalContext(double T_, double hbar_ = 1.0, double kB_ = 1.0);
    double beta() const { return 1.0 / (kB * T); }
    double kT() const { return kB * T; }
    static ThermalContext from_beta(double beta, double hbar = 1.0, double kB = 1.0);
};

class CanonicalEnsemble {
public:
    CanonicalEnsemble(Eigendecomposition h, ThermalContext ctx);

    const Eigendecomposition& hamiltonian() const { return h_; }
    const ThermalContext& context() const { return ctx_; }
    // Boltzmann probabilities in the eigenbasis (normalized, ground-shifted).
    const RVec& weights() const { return p_; }
    double log_z() const { return log_z_; }
    double z() const;   // may overflow to inf for large negative energies
    double mean_energy() const;
    double energy_variance() const;

private:
    Eigendecomposition h_;
    ThermalContext ctx_;
    RVec p_;
    double log_z_ = 0.0;
};

enum class HeatCapacityKind { effective_local, thermodynamic };

struct HeatCapacityResult {
    double value = 0.0;      // variance / (kB T^2)
    double variance = 0.0;
    HeatCapacityKind kind = HeatCapacityKind::effective_local;
};

// ln Z(beta) for a spectrum, ground-shifted (log-sum-exp).
double log_partition(const RVec& energies, double beta);

DensityMatrix canonical_density(const CanonicalEnsemble& e);
double thermal_expectation(const CanonicalEnsemble& e, const DenseOperator& q);
double thermal_variance(const CanonicalEnsemble& e, const DenseOperator& q);
// Tr(rho_can A) for an operator already in the eigenbasis.
cplx thermal_expectation_eigenbasis(const CanonicalEnsemble& e, const Mat& a_eig);
HeatCapacityResult effective_heat_capacity(const CanonicalEnsemble& e, const DenseOperator& h_local);
HeatCapacityResult thermodynamic_heat_capacity(const CanonicalEnsemble& e);

double fermi_function(double eps, double mu, const ThermalContext& ctx);
double fermi_occupation_variance(double eps, double mu, const ThermalContext& ctx);
double thermal_wavelength(double m, const ThermalContext& ctx);
double planckian_time(const ThermalContext& ctx);

} // namespace tub
