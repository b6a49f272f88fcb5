// models_ising_fermi.cpp - classical Ising enumeration, Fermi gas sums, lattice safety
#include "tub/errors.hpp"
#include "tub/models.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace tub {

std::vector<IsingBond> IsingLatticeSpec::resolved_bonds() const {
    if (!bonds.empty()) return bonds;
    std::vector<IsingBond> out;
    auto idx = [this](int x, int y) { return y * Lx + x; };
    for (int y = 0; y < Ly; ++y)
        for (int x = 0; x < Lx; ++x) {
            if (x + 1 < Lx) out.push_back({idx(x, y), idx(x + 1, y), J});
            else if (periodic && Lx > 2) out.push_back({idx(x, y), idx(0, y), J});
            if (y + 1 < Ly) out.push_back({idx(x, y), idx(x, y + 1), J});
            else if (periodic && Ly > 2) out.push_back({idx(x, y), idx(x, 0), J});
        }
    return out;
}

void IsingLatticeSpec::validate() const {
    if (Lx < 1 || Ly < 1) throw ContractError("ising: lattice dims must be positive");
    if (n_spins() > 16) throw CapacityError("ising: at most 16 spins, got " + std::to_string(n_spins()));
    if (h < 0) throw ContractError("ising: field must be nonnegative");
    for (const auto& b : resolved_bonds()) {
        if (b.J < 0) throw ContractError("ising: antiferromagnetic coupling outside the Griffiths domain");
        if (b.i < 0 || b.j < 0 || b.i >= n_spins() || b.j >= n_spins() || b.i == b.j)
            throw ContractError("ising: bad bond indices");
    }
}

IsingEnumeration enumerate_ising(const IsingLatticeSpec& spec, double beta) {
    spec.validate();
    const int n = spec.n_spins();
    const auto bonds = spec.resolved_bonds();
    const bool fields = spec.h > 0;
    const std::size_t nt = bonds.size() + (fields ? n : 0);

    IsingEnumeration out;
    for (const auto& b : bonds) out.labels.push_back("bond(" + std::to_string(b.i) + "," + std::to_string(b.j) + ")");
    if (fields)
        for (int i = 0; i < n; ++i) out.labels.push_back("field(" + std::to_string(i) + ")");

    const long nconf = 1L << n;
    // First pass: energies and ground shift.
    std::vector<double> energy(nconf);
    std::vector<int> s(n);
    double emin = INFINITY;
    for (long c = 0; c < nconf; ++c) {
        for (int i = 0; i < n; ++i) s[i] = ((c >> i) & 1) ? 1 : -1;
        double e = 0.0;
        for (const auto& b : bonds) e -= b.J * s[b.i] * s[b.j];
        if (fields)
            for (int i = 0; i < n; ++i) e -= spec.h * s[i];
        energy[c] = e;
        emin = std::min(emin, e);
    }
    RVec m1 = RVec::Zero(nt);
    Eigen::MatrixXd m2 = Eigen::MatrixXd::Zero(nt, nt);
    RVec loc(nt);
    double zsum = 0.0;
    for (long c = 0; c < nconf; ++c) {
        for (int i = 0; i < n; ++i) s[i] = ((c >> i) & 1) ? 1 : -1;
        const double w = std::exp(-beta * (energy[c] - emin));
        std::size_t k = 0;
        for (const auto& b : bonds) loc(k++) = -b.J * s[b.i] * s[b.j];
        if (fields)
            for (int i = 0; i < n; ++i) loc(k++) = -spec.h * s[i];
        zsum += w;
        m1 += w * loc;
        m2.noalias() += w * loc * loc.transpose();
    }
    m1 /= zsum;
    m2 /= zsum;
    out.log_z = std::log(zsum) - beta * emin;
    out.mean = m1;
    out.covariance = m2 - m1 * m1.transpose();
    // Var(H) from the covariance sum avoids cancellation in e2 - e1^2.
    out.energy_variance = out.covariance.sum();
    return out;
}

void FermiGasSpec::validate() const {
    if (!(m_eff > 0)) throw ContractError("fermi gas: effective mass must be positive");
    if (!(hbar > 0)) throw ContractError("fermi gas: hbar must be positive");
    if (dim < 1 || dim > 3) throw ContractError("fermi gas: dim must be 1, 2 or 3");
}

FermiGasInputs fermi_gas_rate_bound_inputs(const FermiGasSpec& spec, const ThermalContext& ctx, int grid_points) {
    spec.validate();
    if (grid_points < 16) throw ContractError("fermi gas: need at least 16 grid points");
    if (grid_points % 2 == 0) ++grid_points;   // Simpson needs an even panel count
    const double kT = ctx.kT();
    const double lo = std::max(0.0, spec.mu - 40.0 * kT);
    const double hi = spec.mu + 40.0 * kT;
    const double d = spec.dim;
    // states per unit volume and energy, single spin species
    const double pref = std::pow(spec.m_eff / (2.0 * std::numbers::pi * spec.hbar * spec.hbar), d / 2.0) /
                        std::tgamma(d / 2.0);
    FermiGasInputs in;
    const double h = (hi - lo) / (grid_points - 1);
    double cv = 0.0;
    for (int k = 0; k < grid_points; ++k) {
        const double e = lo + h * k;
        // Simpson weights
        const double sw = (k == 0 || k == grid_points - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
        const double g = e > 0 ? pref * std::pow(e, d / 2.0 - 1.0) : 0.0;
        const double w = g * sw * h / 3.0;
        const double f = fermi_function(e, spec.mu, ctx);
        in.eps.push_back(e);
        in.weight.push_back(w);
        in.mode_variance.push_back(fermi_occupation_variance(e, spec.mu, ctx));
        cv += w * (e - spec.mu) * (e - spec.mu) * f * (1.0 - f);
    }
    in.heat_capacity = cv / (ctx.kB * ctx.T * ctx.T);
    return in;
}

void LatticeSafety::validate() const {
    if (!(a > 0)) throw ContractError("lattice constant must be positive");
    if (!(c_L > 0 && c_L < 1)) throw ContractError("Lindemann ratio must lie in (0, 1)");
}

} // namespace tub
