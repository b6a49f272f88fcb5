#pragma once
// Small classical molecular dynamics in reduced units.
#include "tub/dynamics.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tub {

enum class PotentialKind { none, lennard_jones, harmonic_lattice, trap };

std::string to_string(PotentialKind k);

struct LJParams {
    double epsilon = 1.0;
    double sigma = 1.0;
    double cutoff = 2.5;
};

// harmonic_lattice: springs 1/2 k |r_i - r_j - a e_ij|^2 between simple-cubic neighbours.
// trap: 1/2 k |r_i - r0_i|^2 about the starting positions.
struct HarmonicParams {
    double k = 1.0;
    double a = 1.0;
};

struct LangevinParams {
    double gamma = 1.0;
    double T = 1.0;
    std::optional<std::uint64_t> seed;
};

struct MDSystem {
    int N = 64;
    int dim = 3;
    double box = 5.0;
    double mass = 1.0;
    PotentialKind potential = PotentialKind::lennard_jones;
    LJParams lj;
    HarmonicParams harmonic;
    double dt = 0.005;
    std::optional<LangevinParams> thermostat;   // empty: NVE
    bool full_pair_local = false;               // V_i gets whole pair energies instead of halves
    double blowup_T = 1.0;                      // reference temperature for the blow-up guard

    void validate() const;
    double volume() const;
};

struct MDState {
    std::vector<double> x;    // wrapped positions, N*dim
    std::vector<double> xu;   // unwrapped positions
    std::vector<double> v;
    std::vector<double> f;
    std::vector<double> local;      // V_i
    std::vector<double> stress;     // per-particle 1/2 sum_j r_ij (x) f_ij, N*dim*dim
    std::vector<double> anchor;     // trap centres / lattice sites
    std::vector<int> nbr_count;     // partners within cutoff (or bonded)
    double potential = 0.0;
    double virial = 0.0;            // sum_pairs r_ij . f_ij
    long step = 0;
};

// Which per-frame quantities to keep.
struct RecordSpec {
    bool positions = true;
    bool velocities = true;
    bool forces = true;
    bool local = true;
    bool transport = true;   // per-particle shear/bulk/heat contributions
};

struct MDTrajectory {
    int N = 0, dim = 3;
    double box = 0.0, mass = 1.0, dt_sample = 0.0, volume = 0.0;
    std::vector<double> times;
    std::vector<double> pos, vel, force, local;   // frame-major, N*dim (local: N)
    // per particle per frame: shear (xy, xz, yz), bulk, heat (x, y, z) for dim = 3
    std::vector<double> transport;
    static constexpr int kTransport = 7;
    std::vector<double> kinetic, potential, virial, pressure, nbr_mean;
    // Full-neighbourhood local Hamiltonian sum_{j in nbrs+i} m v_j^2 / 2 + V_i, per particle per frame.
    std::vector<double> local_h;

    std::size_t frames() const { return times.size(); }
    double v(std::size_t fr, int i, int l) const { return vel[(fr * N + i) * dim + l]; }
    double x(std::size_t fr, int i, int l) const { return pos[(fr * N + i) * dim + l]; }
    double fo(std::size_t fr, int i, int l) const { return force[(fr * N + i) * dim + l]; }
    double V(std::size_t fr, int i) const { return local[fr * N + i]; }
    double y(std::size_t fr, int i, int c) const { return transport[(fr * N + i) * kTransport + c]; }
};

class MDEngine {
public:
    explicit MDEngine(MDSystem sys);

    const MDSystem& system() const { return sys_; }
    MDState& state() { return st_; }
    const MDState& state() const { return st_; }

    // Simple-cubic (or square / line) start with Maxwell velocities at T, zero net momentum.
    void lattice_start(double T, std::uint64_t seed);
    void set_state(const MDState& s);
    void set_thermostat(std::optional<LangevinParams> t);

    void step();
    void run(long steps);
    MDTrajectory integrate(long steps, int sample_every, RecordSpec rec = {});

    double kinetic_energy() const;
    std::array<double, 3> total_momentum() const;
    void compute_forces();

private:
    void record(MDTrajectory& tr, const RecordSpec& rec) const;
    void check_blowup() const;
    void build_lattice_bonds();

    MDSystem sys_;
    MDState st_;
    std::vector<std::mt19937_64> rng_;   // one stream per particle
    std::vector<std::array<int, 2>> bonds_;
    std::vector<std::array<double, 3>> bond_vec_;
};

MDTrajectory integrate(const MDSystem& sys, MDState& state, long steps, int sample_every);

// ---- analysis ---------------------------------------------------------------

enum class CorrRoute { fft, direct };

// Averaged autocorrelation of many equally sampled series (each length M).
std::vector<double> multi_autocorrelation(const std::vector<std::vector<double>>& series, std::size_t max_lag,
                                          CorrRoute route);
// Cross-correlation <a(t) b(0)> averaged over time origins, lags 0..max_lag.
std::vector<double> cross_correlation(const std::vector<double>& a, const std::vector<double>& b, std::size_t max_lag);

AutocorrelationSeries velocity_autocorrelation(const MDTrajectory& tr, std::size_t max_lag,
                                               CorrRoute route = CorrRoute::fft);

enum class GKUpper { first_zero, full };
struct GreenKuboResult {
    double value = 0.0;
    double upper = 0.0;
    bool used_first_zero = false;
    bool fallback = false;   // first_zero requested but absent
};
GreenKuboResult green_kubo(const AutocorrelationSeries& s, GKUpper upper);

struct Estimate {
    double mean = 0.0;
    double err = 0.0;   // jackknife standard error
};

// Block jackknife of a ratio-free mean.
Estimate jackknife_mean(const std::vector<double>& per_frame, int blocks = 20);

struct MDStatistics {
    int N = 0, dim = 3;
    double mass = 1.0, volume = 0.0, T_target = 0.0;
    Estimate v2;          // per component <v_l^2>
    Estimate v4;          // per component <v_l^4>
    Estimate v4_ratio;    // <v^4>/<v^2>^2 per component
    Estimate f2;          // per component <f_l^2>
    Estimate a2;
    Estimate V_mean, V2;  // <V_i>, <V_i^2>
    Estimate var_V;       // Var(V_i)
    double max_abs_V = 0.0;
    double max_abs_V_centered = 0.0;
    Estimate pressure;
    double var_pressure = 0.0;
    double var_energy = 0.0;      // total energy variance (kB T^2 C_v)
    double z_mean = 0.0;
    double var_local_h = 0.0;     // Var of the full-neighbourhood local Hamiltonian
    double var_v = 0.0;           // per component velocity variance
    double half_drift = 0.0;      // relative <v^2> change between halves
};

// Throws EquilibrationError when <v^2> drifts by more than 5% between halves.
MDStatistics local_statistics(const MDTrajectory& tr, double T_target);

// Central-difference da/dt of sampled forces; returns <(da/dt)^2>/Var(a) per particle-component
// averaged, plus the literal <da/dt>^2/Var(a) form.
struct ForceRateStats {
    double squared_ratio = 0.0;
    double literal_ratio = 0.0;
    double dt = 0.0;
    std::size_t samples = 0;
};
ForceRateStats force_rate_statistics(const MDTrajectory& tr);

// Checkpoint: <prefix>.bin (little-endian f64: x, v) and <prefix>.json sidecar.
void write_checkpoint(const std::string& prefix, const MDSystem& sys, const MDState& st, std::uint64_t seed);
MDState read_checkpoint(const std::string& prefix, MDSystem* sys_out = nullptr);
void write_statistics_csv(const std::string& path, const MDStatistics& s);

} // namespace tub
