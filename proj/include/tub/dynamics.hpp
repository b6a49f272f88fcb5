#pragma once
// Heisenberg-picture dynamics: local Hamiltonians, rates, autocorrelations,
// windowed and long-time averages.
#include "tub/ensemble.hpp"
#include "tub/operators.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tub {

struct HamiltonianTerm {
    std::string label;
    DenseOperator op;
};

enum class SelectionMode { minimal, augmented };

struct LocalHamiltonianSelection {
    std::vector<HamiltonianTerm> terms;
    std::vector<std::size_t> selected;
    SelectionMode mode = SelectionMode::minimal;

    DenseOperator local() const;   // sum of selected terms (zero operator when empty)
    DenseOperator total() const;   // sum of all terms
    std::vector<std::string> selected_labels() const;
};

// h_total, when given, is checked against the sum of terms.
// augment lists term labels merged into the selection in augmented mode.
// valid_block > 0 restricts the commutation test to the leading block of the
// basis (truncated ladder operators).
LocalHamiltonianSelection select_local_hamiltonian(const std::vector<HamiltonianTerm>& terms, const DenseOperator& q,
                                                   SelectionMode mode, const std::vector<std::string>& augment = {},
                                                   const DenseOperator* h_total = nullptr,
                                                   Eigen::Index valid_block = 0);

// (i/hbar) Tr(rho [H~, Q]). With Q(t) = e^{iHt/hbar} Q e^{-iHt/hbar} this is d<Q>/dt;
// for H = (hbar w/2) sigma^z, rho = |+x><+x|, Q = sigma^y the value is +w.
double heisenberg_derivative(const LocalHamiltonianSelection& sel, const DenseOperator& q, const DensityMatrix& rho,
                             double hbar);
double heisenberg_derivative(const DenseOperator& h, const DenseOperator& q, const DensityMatrix& rho, double hbar);

struct AutocorrelationSeries {
    std::vector<double> times;
    std::vector<double> values;
    std::optional<double> first_zero;
    bool no_zero_warning = false;   // set when no sign change on the grid

    void locate_first_zero();
};

std::vector<double> uniform_grid(double t_max, std::size_t n);   // n points, 0..t_max inclusive

// G(t) = Re Tr(rho_can Q(t) Q(0)); with subtract_mean Q -> Q - <Q>.
AutocorrelationSeries autocorrelation(const CanonicalEnsemble& e, const DenseOperator& q,
                                      const std::vector<double>& grid, bool subtract_mean = false);

// Rotates the eigenbasis inside degenerate blocks so that q is diagonal there.
Eigendecomposition resolve_degeneracies(const Eigendecomposition& h, const DenseOperator& q);

double diagonal_ensemble_average(const DensityMatrix& rho, const DenseOperator& q, const Eigendecomposition& h);
double windowed_average(const DensityMatrix& rho, const DenseOperator& q, const Eigendecomposition& h, double window,
                        double hbar);

// <Q(t)> for a density matrix, evaluated through the eigenbasis.
double evolved_expectation(const DensityMatrix& rho, const DenseOperator& q, const Eigendecomposition& h, double t,
                           double hbar);

// Long-time average of <Q(t)>^2 (exact frequency grouping).
double long_time_mean_square(const DensityMatrix& rho, const DenseOperator& q, const Eigendecomposition& h,
                             double hbar);

// Trapezoid integral of a sampled series; upper limit t_end (linear interpolation at the end).
double trapezoid(const std::vector<double>& t, const std::vector<double>& y, double t_end);

} // namespace tub
