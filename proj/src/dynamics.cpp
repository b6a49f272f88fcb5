// dynamics.cpp - Heisenberg-picture helpers
#include "tub/dynamics.hpp"
#include "tub/errors.hpp"
#include "tub/policy.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace tub {

DenseOperator LocalHamiltonianSelection::local() const {
    if (terms.empty()) throw ContractError("selection has no terms");
    DenseOperator acc = DenseOperator::zero(terms.front().op.dim());
    for (std::size_t k : selected) acc = acc + terms[k].op;
    return acc;
}

DenseOperator LocalHamiltonianSelection::total() const {
    if (terms.empty()) throw ContractError("selection has no terms");
    DenseOperator acc = DenseOperator::zero(terms.front().op.dim());
    for (const auto& t : terms) acc = acc + t.op;
    return acc;
}

std::vector<std::string> LocalHamiltonianSelection::selected_labels() const {
    std::vector<std::string> out;
    for (std::size_t k : selected) out.push_back(terms[k].label);
    return out;
}

static double commutator_size(const DenseOperator& a, const DenseOperator& b, Eigen::Index block) {
    const Mat c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
    if (block > 0 && block < c.rows()) return max_abs(c.topLeftCorner(block, block));
    return max_abs(c);
}

LocalHamiltonianSelection select_local_hamiltonian(const std::vector<HamiltonianTerm>& terms, const DenseOperator& q,
                                                   SelectionMode mode, const std::vector<std::string>& augment,
                                                   const DenseOperator* h_total, Eigen::Index valid_block) {
    if (terms.empty()) throw ContractError("select_local_hamiltonian: no terms");
    LocalHamiltonianSelection sel;
    sel.terms = terms;
    sel.mode = mode;
    const auto n = q.dim();
    for (const auto& t : terms)
        if (t.op.dim() != n) throw ShapeError("term '" + t.label + "' has wrong dimension");

    double hscale = 0.0;
    for (const auto& t : terms) hscale = std::max(hscale, max_abs(t.op.matrix()));
    const double tol = policy().commute_tol * std::max(1.0, hscale * std::max(1.0, max_abs(q.matrix())));

    if (h_total) {
        const double dev = max_abs(sel.total().matrix() - h_total->matrix());
        if (dev > policy().commute_tol * std::max(1.0, max_abs(h_total->matrix())))
            throw ContractError("terms do not sum to the Hamiltonian (max deviation " + std::to_string(dev) + ")");
    }

    for (std::size_t k = 0; k < terms.size(); ++k) {
        bool take = commutator_size(terms[k].op, q, valid_block) > tol;
        if (mode == SelectionMode::augmented &&
            std::find(augment.begin(), augment.end(), terms[k].label) != augment.end())
            take = true;
        if (take) sel.selected.push_back(k);
    }
    if (mode == SelectionMode::augmented) {
        for (const auto& a : augment) {
            bool found = false;
            for (const auto& t : terms) found = found || t.label == a;
            if (!found) throw ContractError("augment label '" + a + "' not among terms");
        }
    }
    return sel;
}

double heisenberg_derivative(const DenseOperator& h, const DenseOperator& q, const DensityMatrix& rho, double hbar) {
    if (h.dim() != q.dim() || q.dim() != rho.dim()) throw ShapeError("heisenberg_derivative: dimension mismatch");
    const Mat c = h.matrix() * q.matrix() - q.matrix() * h.matrix();
    const cplx v = cplx(0.0, 1.0 / hbar) * trace_product(rho.matrix(), c);
    return v.real();
}

double heisenberg_derivative(const LocalHamiltonianSelection& sel, const DenseOperator& q, const DensityMatrix& rho,
                             double hbar) {
    return heisenberg_derivative(sel.local(), q, rho, hbar);
}

void AutocorrelationSeries::locate_first_zero() {
    first_zero.reset();
    no_zero_warning = false;
    for (std::size_t k = 1; k < values.size(); ++k) {
        const double a = values[k - 1], b = values[k];
        if (a == 0.0 && k - 1 > 0) {
            first_zero = times[k - 1];
            return;
        }
        if ((a > 0 && b <= 0) || (a < 0 && b >= 0)) {
            const double f = a / (a - b);
            first_zero = times[k - 1] + f * (times[k] - times[k - 1]);
            return;
        }
    }
    no_zero_warning = true;
}

std::vector<double> uniform_grid(double t_max, std::size_t n) {
    if (n < 2) throw ContractError("grid needs at least two points");
    std::vector<double> g(n);
    for (std::size_t k = 0; k < n; ++k) g[k] = t_max * static_cast<double>(k) / static_cast<double>(n - 1);
    return g;
}

AutocorrelationSeries autocorrelation(const CanonicalEnsemble& e, const DenseOperator& q,
                                      const std::vector<double>& grid, bool subtract_mean) {
    if (!q.hermitian()) throw ContractError("autocorrelation requires a hermitian operator");
    if (grid.empty() || grid.front() != 0.0) throw ContractError("time grid must start at 0");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) throw ContractError("time grid must be strictly increasing");
    const auto& h = e.hamiltonian();
    const double hbar = e.context().hbar;
    Mat qe = h.to_eigenbasis(q.matrix());
    if (subtract_mean) {
        const double m = thermal_expectation_eigenbasis(e, qe).real();
        qe.diagonal().array() -= m;
    }
    // G(t) = sum_nm p_n |Q_nm|^2 cos((E_n - E_m) t / hbar)
    const Eigen::Index n = h.dim();
    std::vector<double> amp, freq;
    std::map<long long, std::size_t> bucket;   // merge equal frequencies to keep the sum short
    const double scale = std::max(1.0, h.values.cwiseAbs().maxCoeff());
    for (Eigen::Index a = 0; a < n; ++a) {
        const double pa = e.weights()(a);
        if (pa == 0.0) continue;
        for (Eigen::Index b = 0; b < n; ++b) {
            const double w = pa * std::norm(qe(a, b));
            if (w == 0.0) continue;
            const double om = (h.values(a) - h.values(b)) / hbar;
            const long long key = std::llround(om / (1e-12 * scale / hbar));
            auto it = bucket.find(key);
            if (it == bucket.end()) {
                bucket.emplace(key, amp.size());
                amp.push_back(w);
                freq.push_back(om);
            } else {
                amp[it->second] += w;
            }
        }
    }
    AutocorrelationSeries s;
    s.times = grid;
    s.values.resize(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        double g = 0.0;
        for (std::size_t j = 0; j < amp.size(); ++j) g += amp[j] * std::cos(freq[j] * grid[k]);
        s.values[k] = g;
    }
    s.locate_first_zero();
    return s;
}

Eigendecomposition resolve_degeneracies(const Eigendecomposition& h, const DenseOperator& q) {
    Eigendecomposition out = h;
    const double gap = policy().degeneracy_rel * std::max(h.range(), 1e-300);
    const Eigen::Index n = h.dim();
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && h.values(end) - h.values(end - 1) < gap) ++end;
        const Eigen::Index m = end - start;
        if (m > 1) {
            Mat v = h.vectors.middleCols(start, m);
            Mat qb = v.adjoint() * q.matrix() * v;
            qb = 0.5 * (qb + qb.adjoint());
            Eigen::SelfAdjointEigenSolver<Mat> es(qb);
            out.vectors.middleCols(start, m) = v * es.eigenvectors();
        }
        start = end;
    }
    return out;
}

double diagonal_ensemble_average(const DensityMatrix& rho, const DenseOperator& q, const Eigendecomposition& h) {
    if (rho.dim() != h.dim() || q.dim() != h.dim()) throw ShapeError("diagonal_ensemble_average: dimension mismatch");
    const Mat qe = h.to_eigenbasis(q.matrix());
    const Mat re = h.to_eigenbasis(rho.matrix());
    const double gap = policy().degeneracy_rel * std::max(h.range(), 1e-300);
    const double qtol = 1e-10 * std::max(1.0, max_abs(qe));
    const Eigen::Index n = h.dim();
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = a + 1; b < n && h.values(b) - h.values(a) < gap; ++b)
            if (std::abs(qe(a, b)) > qtol)
                throw DegeneracyError("degenerate levels " + std::to_string(a) + "," + std::to_string(b) +
                                      " with off-diagonal Q; call resolve_degeneracies first");
    double s = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) s += re(k, k).real() * qe(k, k).real();
    return s;
}

static cplx window_factor(double om, double window) {
    const double x = om * window;
    if (std::abs(x) < 1e-6) return cplx(1.0 - x * x / 6.0, x / 2.0);
    return (std::polar(1.0, x) - 1.0) / cplx(0.0, x);
}

double windowed_average(const DensityMatrix& rho, const DenseOperator& q, const Eigendecomposition& h, double window,
                        double hbar) {
    if (!(window > 0)) throw ContractError("window must be positive");
    const Mat qe = h.to_eigenbasis(q.matrix());
    const Mat re = h.to_eigenbasis(rho.matrix());
    const Eigen::Index n = h.dim();
    // Tr(rho Q(t)) = sum_nm rho_mn Q_nm exp(i (E_n - E_m) t / hbar)
    cplx s = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            const cplx c = re(b, a) * qe(a, b);
            if (c == cplx(0.0)) continue;
            if (a == b) s += c;
            else s += c * window_factor((h.values(a) - h.values(b)) / hbar, window);
        }
    return s.real();
}

double evolved_expectation(const DensityMatrix& rho, const DenseOperator& q, const Eigendecomposition& h, double t,
                           double hbar) {
    const Mat qe = h.to_eigenbasis(q.matrix());
    const Mat re = h.to_eigenbasis(rho.matrix());
    const Eigen::Index n = h.dim();
    cplx s = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b)
            s += re(b, a) * qe(a, b) * std::polar(1.0, (h.values(a) - h.values(b)) * t / hbar);
    return s.real();
}

double long_time_mean_square(const DensityMatrix& rho, const DenseOperator& q, const Eigendecomposition& h,
                             double hbar) {
    const Mat qe = h.to_eigenbasis(q.matrix());
    const Mat re = h.to_eigenbasis(rho.matrix());
    const Eigen::Index n = h.dim();
    const double scale = std::max(1.0, h.values.cwiseAbs().maxCoeff());
    // f(t) = sum_W a_W e^{iWt}; for real f, avg f^2 = sum_W |a_W|^2
    std::map<long long, cplx> amp;
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            const cplx c = re(b, a) * qe(a, b);
            if (c == cplx(0.0)) continue;
            const double om = (h.values(a) - h.values(b)) / hbar;
            amp[std::llround(om / (1e-9 * scale / hbar))] += c;
        }
    double s = 0.0;
    for (const auto& kv : amp) s += std::norm(kv.second);
    return s;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& y, double t_end) {
    if (t.size() != y.size()) throw ShapeError("trapezoid: size mismatch");
    double s = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) {
        if (t[k] <= t_end) {
            s += 0.5 * (y[k] + y[k - 1]) * (t[k] - t[k - 1]);
        } else {
            if (t[k - 1] < t_end) {
                const double f = (t_end - t[k - 1]) / (t[k] - t[k - 1]);
                const double ye = y[k - 1] + f * (y[k] - y[k - 1]);
                s += 0.5 * (ye + y[k - 1]) * (t_end - t[k - 1]);
            }
            break;
        }
    }
    return s;
}

} // namespace tub
