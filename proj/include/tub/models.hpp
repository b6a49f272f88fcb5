#pragma once
// Concrete systems: truncated oscillator, XY chain, classical Ising lattice,
// analytic Fermi gas.
#include "tub/dynamics.hpp"
#include "tub/ensemble.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace tub {

// ---- harmonic mode --------------------------------------------------------

struct OscillatorSpec {
    double omega = 1.0;
    double mass = 1.0;
    int n_max = 40;   // highest retained level; dimension n_max + 1
    double hbar = 1.0;
    void validate() const;
};

struct OscillatorModel {
    OscillatorSpec spec;
    DenseOperator H;          // exactly diagonal hbar w (n + 1/2)
    DenseOperator kinetic;    // p^2 / 2m from truncated ladder operators
    DenseOperator potential;  // H - kinetic, so the two terms sum to H exactly
    DenseOperator x, p, n;
    DenseOperator a;          // annihilation (not hermitian)

    std::vector<HamiltonianTerm> terms() const { return {{"kinetic", kinetic}, {"potential", potential}}; }
    // Levels below this index are free of truncation artifacts for the
    // identities [x,p] = i hbar and the kinetic/potential commutator pattern.
    Eigen::Index valid_block() const { return spec.n_max / 2; }
    double x0() const { return std::sqrt(spec.hbar / (spec.mass * spec.omega)); }
    double p0() const { return std::sqrt(spec.hbar * spec.mass * spec.omega); }
};

OscillatorModel build_oscillator(const OscillatorSpec& spec);

namespace osc {
// bx = beta hbar omega
double partition(double bx);        // Z with zero-point energy included
double mean_n(double bx);
double mean_n2(double bx);
double kinetic_variance(double hw, double bx);   // (hw)^2/8 coth^2(bx/2)
double internal_energy(double hw, double bx);
double einstein_capacity(double bx);             // in units of kB
} // namespace osc

// ---- spin-1/2 XY chain ----------------------------------------------------

struct XYChainSpec {
    int N = 4;
    double J = 1.0;
    bool periodic = true;
    double hbar = 1.0;
    void validate() const;
};

class XYChain {
public:
    explicit XYChain(const XYChainSpec& spec);

    const XYChainSpec& spec() const { return spec_; }
    Eigen::Index dim() const { return Eigen::Index(1) << spec_.N; }
    const DenseOperator& H() const { return H_; }
    const std::vector<std::pair<int, int>>& bonds() const { return bonds_; }
    std::vector<int> neighbors(int i) const;

    // S^axis_i with eigenvalues +-hbar/2; axis in {'x','y','z'}.
    DenseOperator site(char axis, int i) const;
    // Terms split per bond and component: "xx(i,j)" and "yy(i,j)".
    std::vector<HamiltonianTerm> terms() const;
    // Unordered pairs of distinct neighbours of a common site, grouped by chain distance.
    // Chain geometry only; hypercubic counts are documented in the README.
    std::vector<std::pair<int, int>> neighbor_pairs(int i) const;

private:
    XYChainSpec spec_;
    std::vector<std::pair<int, int>> bonds_;
    DenseOperator H_;
};

// Tilt for XY probes: sum over bonds of (n.S_i)(n.S_j) plus hbar sum_i n.S_i, n = (1,2,3)/sqrt(14).
DenseOperator xy_tilt_operator(const XYChain& chain);

// Two-site operator (4x4, site i factor first) embedded in an N-qubit space.
Mat embed_two_site(const Mat& op4, int i, int j, int N);
Mat embed_one_site(const Mat& op2, int i, int N);

// ---- classical Ising ferromagnet -----------------------------------------

struct IsingBond {
    int i = 0, j = 0;
    double J = 1.0;
};

struct IsingLatticeSpec {
    int Lx = 3, Ly = 3;
    double J = 1.0;
    double h = 0.0;
    bool periodic = true;
    std::vector<IsingBond> bonds;   // empty: nearest-neighbour square lattice from Lx, Ly, J
    int n_spins() const { return Lx * Ly; }
    std::vector<IsingBond> resolved_bonds() const;
    void validate() const;
};

struct IsingEnumeration {
    double log_z = 0.0;
    std::vector<std::string> labels;   // local terms: bonds then fields
    RVec mean;
    Eigen::MatrixXd covariance;
    double energy_variance = 0.0;      // Var(H) = kB T^2 C_v
};

IsingEnumeration enumerate_ising(const IsingLatticeSpec& spec, double beta);

// ---- free Fermi gas (analytic) -------------------------------------------

struct FermiGasSpec {
    double m_eff = 1.0;
    double mu = 1.0;     // chemical potential; also used as the Fermi energy
    double hbar = 1.0;
    int dim = 3;
    void validate() const;
};

struct FermiGasInputs {
    std::vector<double> eps, weight;      // mode energies and their state counts (unit volume)
    std::vector<double> mode_variance;    // eps^2 f (1 - f)
    double heat_capacity = 0.0;           // sum w (eps - mu)^2 f (1-f) / (kB T^2)
};

// grid_points energies spread over mu +- 40 kB T (clipped at zero).
FermiGasInputs fermi_gas_rate_bound_inputs(const FermiGasSpec& spec, const ThermalContext& ctx, int grid_points);

// ---- lattice safety -------------------------------------------------------

struct LatticeSafety {
    double a = 1.0;
    double c_L = 0.1;
    void validate() const;
};

} // namespace tub
