#pragma once
// Small hand-built oracles shared by the test files. Nothing here calls the library.
#include <Eigen/Dense>
#include <complex>
#include <random>

namespace oracle {

using C = std::complex<double>;
using M = Eigen::MatrixXcd;

inline M sx() { M m(2, 2); m << 0, 1, 1, 0; return m; }
inline M sy() { M m(2, 2); m << 0, C(0, -1), C(0, 1), 0; return m; }
inline M sz() { M m(2, 2); m << 1, 0, 0, -1; return m; }

inline M kron(const M& a, const M& b) {
    M out(a.rows() * b.rows(), a.cols() * b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// S^axis on site i of an N-site chain, site 0 is the leftmost factor, S = sigma/2.
inline M spin(const M& pauli, int i, int N) {
    M out = M::Identity(1, 1);
    for (int k = 0; k < N; ++k) out = kron(out, k == i ? M(0.5 * pauli) : M(M::Identity(2, 2)));
    return out;
}

// H = -J sum (SxSx + SySy) on a periodic (N > 2) or open chain.
inline M xy_hamiltonian(int N, double J, bool periodic) {
    const int D = 1 << N;
    M h = M::Zero(D, D);
    const int nb = periodic && N > 2 ? N : N - 1;
    for (int b = 0; b < nb; ++b) {
        const int i = b, j = (b + 1) % N;
        h -= J * (spin(sx(), i, N) * spin(sx(), j, N) + spin(sy(), i, N) * spin(sy(), j, N));
    }
    return h;
}

// rho = exp(-beta H)/Z via a separate self-adjoint solver call.
inline M gibbs(const M& h, double beta) {
    Eigen::SelfAdjointEigenSolver<M> es(h);
    const double e0 = es.eigenvalues().minCoeff();
    Eigen::VectorXd w = (-beta * (es.eigenvalues().array() - e0)).exp();
    w /= w.sum();
    return es.eigenvectors() * w.cast<C>().asDiagonal() * es.eigenvectors().adjoint();
}

inline double tr_re(const M& a) { return a.trace().real(); }

} // namespace oracle
