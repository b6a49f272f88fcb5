// models_xy.cpp - spin-1/2 XY chain, H = -J sum_<ij> (Sx_i Sx_j + Sy_i Sy_j)
#include <cmath>
#include "tub/errors.hpp"
#include "tub/models.hpp"
#include "tub/policy.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace tub {

void XYChainSpec::validate() const {
    if (N < 2 || N > 12) throw CapacityError("XY chain: N must be in [2, 12], got " + std::to_string(N));
    if (!(hbar > 0)) throw ContractError("XY chain: hbar must be positive");
    if ((std::size_t(1) << N) > policy().dim_cap) throw CapacityError("XY chain dimension exceeds cap");
}

// Site 0 is the most significant factor, matching tensor_product ordering.
Mat embed_one_site(const Mat& op2, int i, int N) {
    const Eigen::Index d = Eigen::Index(1) << N;
    const int sh = N - 1 - i;
    Mat m = Mat::Zero(d, d);
    for (Eigen::Index s = 0; s < d; ++s) {
        const int b = (s >> sh) & 1;
        for (int c = 0; c < 2; ++c) {
            const cplx v = op2(c, b);
            if (v == cplx(0.0)) continue;
            const Eigen::Index t = (s & ~(Eigen::Index(1) << sh)) | (Eigen::Index(c) << sh);
            m(t, s) += v;
        }
    }
    return m;
}

Mat embed_two_site(const Mat& op4, int i, int j, int N) {
    const Eigen::Index d = Eigen::Index(1) << N;
    const int si = N - 1 - i, sj = N - 1 - j;
    Mat m = Mat::Zero(d, d);
    for (Eigen::Index s = 0; s < d; ++s) {
        const int bi = (s >> si) & 1, bj = (s >> sj) & 1;
        const int col = 2 * bi + bj;
        for (int row = 0; row < 4; ++row) {
            const cplx v = op4(row, col);
            if (v == cplx(0.0)) continue;
            const int ci = row >> 1, cj = row & 1;
            Eigen::Index t = s & ~(Eigen::Index(1) << si) & ~(Eigen::Index(1) << sj);
            t |= (Eigen::Index(ci) << si) | (Eigen::Index(cj) << sj);
            m(t, s) += v;
        }
    }
    return m;
}

static Mat spin_matrix(char axis, double hbar) {
    switch (axis) {
    case 'x': return 0.5 * hbar * pauli::x().matrix();
    case 'y': return 0.5 * hbar * pauli::y().matrix();
    case 'z': return 0.5 * hbar * pauli::z().matrix();
    default: throw ContractError(std::string("unknown spin axis '") + axis + "'");
    }
}

static Mat kron2(const Mat& a, const Mat& b) { return tensor_product(DenseOperator(a, false), DenseOperator(b, false)).matrix(); }

XYChain::XYChain(const XYChainSpec& spec) : spec_(spec) {
    spec_.validate();
    const int N = spec_.N;
    for (int i = 0; i + 1 < N; ++i) bonds_.emplace_back(i, i + 1);
    if (spec_.periodic && N > 2) bonds_.emplace_back(N - 1, 0);
    const Mat sx = spin_matrix('x', spec_.hbar), sy = spin_matrix('y', spec_.hbar);
    const Mat bond = -spec_.J * (kron2(sx, sx) + kron2(sy, sy));
    Mat h = Mat::Zero(dim(), dim());
    for (auto [i, j] : bonds_) h += embed_two_site(bond, i, j, N);
    h = 0.5 * (h + h.adjoint());
    H_ = DenseOperator(std::move(h), true);
}

std::vector<int> XYChain::neighbors(int i) const {
    std::vector<int> out;
    for (auto [a, b] : bonds_) {
        if (a == i) out.push_back(b);
        else if (b == i) out.push_back(a);
    }
    return out;
}

DenseOperator XYChain::site(char axis, int i) const {
    if (i < 0 || i >= spec_.N) throw ShapeError("site index out of range");
    return DenseOperator(embed_one_site(spin_matrix(axis, spec_.hbar), i, spec_.N), true);
}

std::vector<HamiltonianTerm> XYChain::terms() const {
    const Mat sx = spin_matrix('x', spec_.hbar), sy = spin_matrix('y', spec_.hbar);
    const Mat xx = -spec_.J * kron2(sx, sx), yy = -spec_.J * kron2(sy, sy);
    std::vector<HamiltonianTerm> out;
    for (auto [i, j] : bonds_) {
        const std::string tag = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
        Mat a = embed_two_site(xx, i, j, spec_.N), b = embed_two_site(yy, i, j, spec_.N);
        out.push_back({"xx" + tag, DenseOperator(0.5 * (a + a.adjoint()), true)});
        out.push_back({"yy" + tag, DenseOperator(0.5 * (b + b.adjoint()), true)});
    }
    return out;
}

std::vector<std::pair<int, int>> XYChain::neighbor_pairs(int i) const {
    auto nb = neighbors(i);
    std::vector<std::pair<int, int>> out;
    for (std::size_t a = 0; a < nb.size(); ++a)
        for (std::size_t b = a + 1; b < nb.size(); ++b) out.emplace_back(nb[a], nb[b]);
    return out;
}

DenseOperator xy_tilt_operator(const XYChain& chain) {
    // generic axis so the probe is complex and breaks the chain symmetries
    const double nx = 1.0 / std::sqrt(14.0), ny = 2.0 / std::sqrt(14.0), nz = 3.0 / std::sqrt(14.0);
    const double hb = chain.spec().hbar;
    const Mat s = nx * spin_matrix('x', hb) + ny * spin_matrix('y', hb) + nz * spin_matrix('z', hb);
    const Mat ss = kron2(s, s);
    Mat v = Mat::Zero(chain.dim(), chain.dim());
    for (auto [i, j] : chain.bonds()) v += embed_two_site(ss, i, j, chain.spec().N);
    // linear part breaks the pi rotation about z that would pin <S^x>, <S^y> to zero
    for (int i = 0; i < chain.spec().N; ++i) v += hb * embed_one_site(s, i, chain.spec().N);
    return DenseOperator(0.5 * (v + v.adjoint()), true);
}

} // namespace tub
