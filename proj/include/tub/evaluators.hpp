#pragma once
// One evaluator per family of inequalities. Each returns BoundReports with
// lhs = the side that should be larger, rhs = the constrained side.
#include "tub/constants.hpp"
#include "tub/dynamics.hpp"
#include "tub/md.hpp"
#include "tub/models.hpp"
#include "tub/probes.hpp"
#include "tub/report.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace tub {

// ---- quantum model bundle ---------------------------------------------------

struct QuantumModel {
    std::string name;
    DenseOperator H;
    Eigendecomposition eig;
    std::vector<HamiltonianTerm> terms;
    Eigen::Index valid_block = 0;
};

QuantumModel make_quantum_model(std::string name, DenseOperator H, std::vector<HamiltonianTerm> terms,
                                Eigen::Index valid_block = 0);
QuantumModel quantum_model(const XYChain& chain);
QuantumModel quantum_model(const OscillatorModel& osc);

struct SiteObservable {
    std::string label;
    DenseOperator q;
    LocalHamiltonianSelection sel;
};

SiteObservable make_site(const QuantumModel& m, std::string label, DenseOperator q,
                         SelectionMode mode = SelectionMode::minimal, const std::vector<std::string>& augment = {});
// S^axis_i for every site of the chain.
std::vector<SiteObservable> xy_sites(const QuantumModel& m, const XYChain& chain, char axis,
                                     SelectionMode mode = SelectionMode::minimal);

// Var(H~_i) for S^x_i from the two-point S^y correlators alone (independent route).
double xy_local_variance_from_correlators(const XYChain& chain, const CanonicalEnsemble& e, int i);

// ---- rate bounds ------------------------------------------------------------

BoundReport central_rate_bound(const QuantumModel& m, const ProbeState& probe, const std::vector<SiteObservable>& sites,
                               const ThermalContext& ctx);

enum class MomentVariant { semiclassical, exact_deformed, bounded_norm };
std::string to_string(MomentVariant v);
MomentVariant moment_variant_from_string(const std::string& s);

// (2/hbar^2)(<dH dQ^2 dH> + <dQ dH^2 dQ>) against <Qdot^2>, Qdot = (i/hbar)[H~, Q].
struct DeformedQuadratic {
    double lhs = 0.0;
    double rhs = 0.0;
};
DeformedQuadratic deformed_quadratic(const DensityMatrix& rho, const DenseOperator& htilde, const DenseOperator& q,
                                     double hbar);

// rho defaults to the canonical state.
BoundReport moment_rate_bound(const QuantumModel& m, const SiteObservable& site, const ThermalContext& ctx, int n,
                              MomentVariant variant, const DensityMatrix* rho = nullptr);

BoundReport autocorr_derivative_bound(const AutocorrelationSeries& series, const CanonicalEnsemble& e,
                                      const SiteObservable& site, bool subtract_mean = false);

BoundReport two_point_correlator_bound(const QuantumModel& m, const ProbeState& probe,
                                       const std::vector<SiteObservable>& region, const ThermalContext& ctx,
                                       double window = 0.0, int window_points = 64);

BoundReport lyapunov_bound_quantum(const QuantumModel& m, const ProbeState& pair, const std::vector<SiteObservable>& sites,
                                   const ThermalContext& ctx, const std::vector<double>& grid);

// ---- speed / displacement ---------------------------------------------------

// Quantum oscillator: long-time mode velocity under a probe whose diagonal is canonical.
std::vector<BoundReport> speed_displacement_bound(const OscillatorModel& osc, const ProbeState& probe,
                                                  const LatticeSafety& safety, const ThermalContext& ctx);
// MD: displacement variance, mode velocity and a compact coordinate. The
// equipartition flag is mandatory (contract error when absent).
std::vector<BoundReport> speed_displacement_bound(const MDTrajectory& tr, std::optional<bool> equipartition,
                                                  const std::optional<LatticeSafety>& safety, const ThermalContext& ctx);

// Einstein-form and kinetic-form mode-velocity budgets (closed forms).
double mode_velocity_budget_kinetic(double omega, double a, double c_L, double bx);
double mode_velocity_budget_einstein(double omega, double a, double c_L, double bx);

// ---- MD-fed bounds ----------------------------------------------------------

enum class InteractionMode { variance, bounded_norm, power_law };
std::string to_string(InteractionMode m);

BoundReport acceleration_force_bound(const MDStatistics& st, const ThermalContext& ctx, InteractionMode mode,
                                     std::optional<double> norm_V = std::nullopt,
                                     std::optional<double> power_law_C = std::nullopt, bool in_regime = true);

BoundReport force_rate_bound(const ForceRateStats& fr, double z, int d, const ThermalContext& ctx, bool in_regime = true);

struct DiffusionInputs {
    double mass = 1.0;
    double v4 = 0.0;        // <v_l^4>
    double V2 = 0.0;        // <V_i^2>
    double var_V = 0.0;     // Var(V_i)
    bool use_variance = false;
    double A_D = 1.0;
    double radius = 0.5;    // Stokes-Einstein radius
    // empirical maximality checks, when available
    std::optional<bool> maximal_at_zero;
};

DiffusionInputs diffusion_inputs(const MDStatistics& st, bool use_variance = false);
BoundReport diffusion_lower_bound(const AutocorrelationSeries& gv, const DiffusionInputs& in, const ThermalContext& ctx);

enum class TransportKind { diffusion, shear_viscosity, bulk_viscosity, thermal_conductivity };
std::string to_string(TransportKind k);
TransportKind transport_kind_from_string(const std::string& s);

struct TransportInputs {
    TransportKind kind = TransportKind::diffusion;
    AutocorrelationSeries G;   // G_Ydot(t)
    double yi_y = 0.0;         // <Ydot_i Ydot>
    double yi2_y2 = 0.0;       // <Ydot_i Ydot^2 Ydot_i>
    double var_h = 0.0;        // Var(H~_i) (or <V_i^2> for diffusion)
    std::optional<bool> maximal_at_zero;
    json extra = json::object();
};

TransportInputs transport_inputs(const MDTrajectory& tr, const MDStatistics& st, TransportKind kind, std::size_t max_lag);
BoundReport transport_lower_bound(const TransportInputs& in, const ThermalContext& ctx);

// Finite-temperature comparison of G_P(0) with kB T^2 (dP/dT)^2 / C_v.
struct PressureFluctuationCheck {
    double G_P0 = 0.0;
    double thermodynamic = 0.0;
    double ratio = 0.0;
};
PressureFluctuationCheck pressure_fluctuation_check(const MDStatistics& lo, const MDStatistics& mid,
                                                    const MDStatistics& hi, double dT);

// ---- gradients --------------------------------------------------------------

struct ScalarFunction {
    enum class Kind { gaussian, constant, cosine } kind = Kind::gaussian;
    double width = 1.0;   // gaussian width or 1/wavenumber
    double value = 1.0;   // constant value / amplitude
};

// Samples are points in d dimensions (flattened, point-major).
struct ConfigurationSamples {
    int d = 1;
    std::vector<double> x;
    std::size_t count() const { return x.size() / static_cast<std::size_t>(d); }
};

ConfigurationSamples gaussian_samples(int d, double s, std::size_t n, std::uint64_t seed);

// n-th derivative along one axis of a separable f.
double scalar_derivative(const ScalarFunction& f, double x, int n);

BoundReport gradient_bound(const ConfigurationSamples& s, const ScalarFunction& f, int n, double mass,
                           const ThermalContext& ctx, bool equipartition = true);
// d-dimensional field form (sum over components), n = 0 only.
BoundReport field_gradient_bound(const ConfigurationSamples& s, const ScalarFunction& f, double mass,
                                 const ThermalContext& ctx, bool equipartition = true);

struct MomentumPowerRow {
    int n = 0;
    double printed = 0.0;    // the closed form with (2 m kB T)^n
    double gaussian = 0.0;   // exact Gaussian moment Var(p^n)
};
std::vector<MomentumPowerRow> momentum_power_table(int n_max, double mass, const ThermalContext& ctx);
long double_factorial(int n);

// ---- Lyapunov (classical) ---------------------------------------------------

struct SeparationSeries {
    std::vector<double> t, sep;   // mean |dr_i| between replicas
    double delta = 0.0;
    double scale = 1.0;           // system size used for the window cap
    double kinetic_var = 0.0;     // measured Var of the single-particle kinetic energy
    int d = 3;
};

SeparationSeries classical_replica_separation(const MDSystem& sys, const MDState& start, double delta, long steps,
                                              int sample_every, std::uint64_t seed);
BoundReport lyapunov_bound_classical(const SeparationSeries& s, const ThermalContext& ctx);

// ---- Ioffe-Regel, orthogonality, thermalization -----------------------------

struct BallisticParams {
    double speed = 0.0;
    double l_mfp = 0.0;
    double mass = 1.0;
};
double windowed_position_variance(double speed, double tau, int quadrature_points = 4097);
BoundReport ioffe_regel_check(double tau, const BallisticParams& p, const ThermalContext& ctx);
double thermal_wavevector(double mass, const ThermalContext& ctx);

BoundReport orthogonality_time_bound(const Eigendecomposition& h, const Vec& psi, double hbar, double horizon);
// Thermal mode: scan the thermofield double of rho_can under H (x) 1.
BoundReport orthogonality_time_bound(const CanonicalEnsemble& e, double horizon);

BoundReport thermalization_window_bound(const QuantumModel& m, const ProbeState& probe, const SiteObservable& site,
                                        const ThermalContext& ctx, int points_per_decade = 16);

// ---- reflection positivity --------------------------------------------------

BoundReport reflection_positivity_audit(const IsingLatticeSpec& spec, double beta);
// decoupled = true asserts Var(H) = sum Var(terms) within 1e-9; otherwise exploratory.
BoundReport reflection_positivity_audit(const std::vector<HamiltonianTerm>& terms, const CanonicalEnsemble& e,
                                        bool decoupled);

// ---- scaling ----------------------------------------------------------------

enum class ScalingRegime { low_T, high_T };

struct PowerLawFit {
    double exponent = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
    double min_local = 0.0;
    double max_local = 0.0;
};
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

BoundReport lowT_highT_scaling(const std::string& family, const std::vector<double>& T,
                               const std::vector<double>& sqrt_variance, ScalingRegime regime);
std::vector<double> fermi_gas_sqrt_variance(const FermiGasSpec& spec, const std::vector<double>& T, double kB = 1.0);
// full: ED variance of H_w (gapped); kinetic: closed-form kinetic variance.
std::vector<double> oscillator_sqrt_variance(const OscillatorSpec& spec, const std::vector<double>& T, bool kinetic,
                                             double kB = 1.0);

// ---- ETH ----------------------------------------------------------------------

double random_phase_rate_squared(const Eigendecomposition& h, const Mat& q_eig, double hbar, std::uint64_t seed);
BoundReport eth_offdiagonal_experiment(const std::vector<int>& sizes, int seeds, std::uint64_t seed, double J = 1.0);

// ---- randomized and closed-form checks ---------------------------------------

struct FuzzSummary {
    std::size_t draws = 0;
    double min_margin = 0.0;      // smallest lhs - rhs seen
    std::size_t violations = 0;   // draws below the stated tolerance
    double tolerance = 0.0;
};

// Var(A) Var(B) - |<[A,B]>|^2/4 for random rho and Hermitian A, B (dims 2..max_dim).
FuzzSummary uncertainty_fuzz(int draws, int max_dim, std::uint64_t seed);
// Tr(rho A A+) Tr(rho B+ B) - |Tr(rho A B)|^2 for general A, B.
FuzzSummary cauchy_schwarz_fuzz(int draws, int max_dim, std::uint64_t seed);
// deformed_quadratic lhs - rhs, relative to max(lhs, 1).
FuzzSummary deformed_moment_fuzz(int draws, int max_dim, std::uint64_t seed);
// Random Hamiltonians and pure states in dimension dim; margin of the orthogonality report.
FuzzSummary orthogonality_fuzz(int draws, int dim, std::uint64_t seed);

struct OscillatorClosedForm {
    double var_rel_err = 0.0;   // ED Var(p^2/2m) vs closed form
    double z_rel_err = 0.0;     // ED partition function vs closed form
};
OscillatorClosedForm oscillator_closed_form(const OscillatorSpec& spec, double bx);

} // namespace tub
