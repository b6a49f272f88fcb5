#pragma once
#include <cstddef>

namespace tub {

// Global numeric tolerances. Defaults are the contract values; override with
// set_policy() before doing any work (not thread safe to change mid-run).
struct NumericPolicy {
    double hermitian_rel = 1e-12;   // max|A - A^dag| <= hermitian_rel * max|A|
    double trace_tol = 1e-10;
    double psd_tol = 1e-10;
    double unitary_tol = 1e-10;
    double reconstruct_rel = 1e-9;
    double commute_tol = 1e-10;     // relative, for term selection
    double degeneracy_rel = 1e-9;   // gap below this * spectral range counts as degenerate
    double denominator_min = 1e-12;
    std::size_t dim_cap = 4096;
};

const NumericPolicy& policy();
void set_policy(const NumericPolicy& p);

} // namespace tub
