#pragma once
// Non-stationary probe states used to exercise rate bounds.
#include "tub/ensemble.hpp"
#include "tub/operators.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

namespace tub {

enum class ProbeKind { canonical, tilted, filtered_pure, replica_pair, dephased };

std::string to_string(ProbeKind k);

struct ProbeState {
    ProbeKind kind = ProbeKind::canonical;
    DensityMatrix rho;
    std::optional<DensityMatrix> partner;   // second replica for replica-pair probes
    double epsilon = 0.0;
    std::uint64_t seed = 0;
};

ProbeState canonical_probe(const CanonicalEnsemble& e);
// rho = exp(-beta (H + eps V)) / Z'
ProbeState tilted_probe(const DenseOperator& h, const DenseOperator& v, double eps, const ThermalContext& ctx);
// Random Gaussian amplitudes on eigenstates with E in [e_lo, e_hi].
ProbeState filtered_pure_probe(const Eigendecomposition& h, double e_lo, double e_hi, std::uint64_t seed);
// rho1 = tilted(+delta), rho2 = tilted(-delta)
ProbeState replica_pair_probe(const DenseOperator& h, const DenseOperator& v, double delta, const ThermalContext& ctx);
// (1 - s) rho_can + s |psi><psi|, psi = sum_n sqrt(p_n) e^{i phi_n} |n>; diagonal stays canonical.
ProbeState dephased_mixture_probe(const CanonicalEnsemble& e, double s, std::uint64_t seed);

} // namespace tub
