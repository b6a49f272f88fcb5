// probes.cpp - probe state construction
#include "tub/probes.hpp"
#include "tub/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace tub {

std::string to_string(ProbeKind k) {
    switch (k) {
    case ProbeKind::canonical: return "canonical";
    case ProbeKind::tilted: return "tilted";
    case ProbeKind::filtered_pure: return "filtered-pure";
    case ProbeKind::replica_pair: return "replica-pair";
    case ProbeKind::dephased: return "dephased";
    }
    return "unknown";
}

ProbeState canonical_probe(const CanonicalEnsemble& e) {
    ProbeState p;
    p.kind = ProbeKind::canonical;
    p.rho = canonical_density(e);
    return p;
}

static DensityMatrix thermal_of(const DenseOperator& h, const ThermalContext& ctx) {
    CanonicalEnsemble e(hermitian_eigh(h), ctx);
    return canonical_density(e);
}

ProbeState tilted_probe(const DenseOperator& h, const DenseOperator& v, double eps, const ThermalContext& ctx) {
    if (!v.hermitian()) throw ContractError("tilt operator must be hermitian");
    ProbeState p;
    p.kind = ProbeKind::tilted;
    p.epsilon = eps;
    p.rho = thermal_of(h + v.scaled(eps), ctx);
    return p;
}

ProbeState filtered_pure_probe(const Eigendecomposition& h, double e_lo, double e_hi, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Vec c = Vec::Zero(h.dim());
    int used = 0;
    for (Eigen::Index k = 0; k < h.dim(); ++k) {
        const double re = g(rng), im = g(rng);   // always draw so the stream does not depend on the window
        if (h.values(k) >= e_lo && h.values(k) <= e_hi) {
            c(k) = cplx(re, im);
            ++used;
        }
    }
    if (used == 0) throw ContractError("filtered-pure probe: energy window contains no eigenstates");
    ProbeState p;
    p.kind = ProbeKind::filtered_pure;
    p.seed = seed;
    p.rho = DensityMatrix::from_pure(h.vectors * c);
    return p;
}

ProbeState replica_pair_probe(const DenseOperator& h, const DenseOperator& v, double delta, const ThermalContext& ctx) {
    ProbeState p;
    p.kind = ProbeKind::replica_pair;
    p.epsilon = delta;
    p.rho = thermal_of(h + v.scaled(delta), ctx);
    p.partner = thermal_of(h + v.scaled(-delta), ctx);
    return p;
}

ProbeState dephased_mixture_probe(const CanonicalEnsemble& e, double s, std::uint64_t seed) {
    if (!(s >= 0 && s <= 1)) throw ContractError("mixture weight must lie in [0, 1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    const auto& h = e.hamiltonian();
    Vec c(h.dim());
    for (Eigen::Index k = 0; k < h.dim(); ++k) c(k) = std::polar(std::sqrt(e.weights()(k)), u(rng));
    const Vec psi = h.vectors * c;
    Mat m = (1.0 - s) * canonical_density(e).matrix() + s * (psi * psi.adjoint());
    m = 0.5 * (m + m.adjoint());
    ProbeState p;
    p.kind = ProbeKind::dephased;
    p.epsilon = s;
    p.seed = seed;
    p.rho = DensityMatrix(DenseOperator(std::move(m), true));
    return p;
}

} // namespace tub
