// checks.cpp - randomized property checks and oscillator closed forms
#include "tub/evaluators.hpp"
#include "tub/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace tub {

namespace {

struct Draw {
    std::mt19937_64 rng;
    std::normal_distribution<double> nd{0.0, 1.0};

    explicit Draw(std::uint64_t seed) : rng(seed) {}

    int dim(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
    Mat gaussian(int r, int c) {
        Mat m(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) m(i, j) = cplx(nd(rng), nd(rng));
        return m;
    }
    DenseOperator hermitian(int d) {
        Mat x = gaussian(d, d);
        return DenseOperator(0.5 * (x + x.adjoint()), true);
    }
    // random rank between 1 and d
    DensityMatrix density(int d) {
        const Mat g = gaussian(d, dim(1, d));
        Mat r = g * g.adjoint();
        r /= r.trace().real();
        return DensityMatrix(DenseOperator(0.5 * (r + r.adjoint()), true));
    }
    Vec state(int d) {
        Vec v = gaussian(d, 1).col(0);
        return v / v.norm();
    }
};

void record(FuzzSummary& s, double margin) {
    if (s.draws == 0 || margin < s.min_margin) s.min_margin = margin;
    if (margin < -s.tolerance) ++s.violations;
    ++s.draws;
}

} // namespace

FuzzSummary uncertainty_fuzz(int draws, int max_dim, std::uint64_t seed) {
    Draw g(seed);
    FuzzSummary s;
    s.tolerance = 1e-10;
    for (int k = 0; k < draws; ++k) {
        const int d = g.dim(2, max_dim);
        const auto rho = g.density(d);
        const auto a = g.hermitian(d), b = g.hermitian(d);
        const cplx c = trace_product(rho.matrix(), commutator(a, b).matrix());
        record(s, variance(rho, a) * variance(rho, b) - 0.25 * std::norm(c));
    }
    return s;
}

FuzzSummary cauchy_schwarz_fuzz(int draws, int max_dim, std::uint64_t seed) {
    Draw g(seed);
    FuzzSummary s;
    s.tolerance = 1e-10;
    for (int k = 0; k < draws; ++k) {
        const int d = g.dim(2, max_dim);
        const auto rho = g.density(d);
        const Mat a = g.gaussian(d, d), b = g.gaussian(d, d);
        const Mat& r = rho.matrix();
        const double lhs = trace_product(r, a * a.adjoint()).real() * trace_product(r, b.adjoint() * b).real();
        record(s, lhs - std::norm(trace_product(r, a * b)));
    }
    return s;
}

FuzzSummary deformed_moment_fuzz(int draws, int max_dim, std::uint64_t seed) {
    Draw g(seed);
    FuzzSummary s;
    s.tolerance = 1e-9;
    for (int k = 0; k < draws; ++k) {
        const int d = g.dim(2, max_dim);
        const auto rho = g.density(d);
        const auto h = g.hermitian(d), q = g.hermitian(d);
        const auto r = deformed_quadratic(rho, h, q, 1.0);
        record(s, (r.lhs - r.rhs) / std::max(r.lhs, 1.0));
    }
    return s;
}

FuzzSummary orthogonality_fuzz(int draws, int dim, std::uint64_t seed) {
    Draw g(seed);
    FuzzSummary s;
    s.tolerance = 1e-9;
    for (int k = 0; k < draws; ++k) {
        const auto h = hermitian_eigh(g.hermitian(dim));
        const auto rep = orthogonality_time_bound(h, g.state(dim), 1.0, 0.0);
        record(s, rep.margin);
    }
    return s;
}

OscillatorClosedForm oscillator_closed_form(const OscillatorSpec& spec, double bx) {
    const auto m = build_oscillator(spec);
    const double hw = spec.hbar * spec.omega;
    const ThermalContext ctx(hw / bx, spec.hbar, 1.0);
    const auto eig = hermitian_eigh(m.H);
    CanonicalEnsemble e(eig, ctx);
    OscillatorClosedForm out;
    const double var = thermal_variance(e, m.kinetic);
    const double ref = osc::kinetic_variance(hw, bx);
    out.var_rel_err = std::abs(var - ref) / ref;
    double z = 0.0;
    for (Eigen::Index n = 0; n < eig.dim(); ++n) z += std::exp(-eig.values(n) / ctx.kT());
    const double zr = osc::partition(bx);
    out.z_rel_err = std::abs(z - zr) / zr;
    return out;
}

} // namespace tub
