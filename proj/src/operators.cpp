// operators.cpp - dense operator algebra
#include "tub/operators.hpp"
#include "tub/errors.hpp"
#include "tub/policy.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <string>

namespace tub {

double max_abs(const Mat& a) { return a.size() ? a.cwiseAbs().maxCoeff() : 0.0; }

DenseOperator::DenseOperator(Mat m, bool hermitian) : m_(std::move(m)), herm_(hermitian) {
    if (m_.rows() != m_.cols())
        throw ShapeError("operator must be square, got " + std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()));
    if (static_cast<std::size_t>(m_.rows()) > policy().dim_cap)
        throw CapacityError("operator dimension " + std::to_string(m_.rows()) + " exceeds cap");
    if (herm_) {
        const double scale = max_abs(m_);
        const double dev = max_abs(m_ - m_.adjoint());
        if (dev > policy().hermitian_rel * scale)
            throw ContractError("hermitian flag set but max|A - A^dag| = " + std::to_string(dev));
    }
}

DenseOperator DenseOperator::identity(Eigen::Index n) { return DenseOperator(Mat::Identity(n, n), true); }
DenseOperator DenseOperator::zero(Eigen::Index n) { return DenseOperator(Mat::Zero(n, n), true); }
DenseOperator DenseOperator::diagonal(const RVec& d) {
    return DenseOperator(d.cast<cplx>().asDiagonal().toDenseMatrix(), true);
}

static void require_same_dim(const DenseOperator& a, const DenseOperator& b) {
    if (a.dim() != b.dim())
        throw ShapeError("dimension mismatch " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}

DenseOperator DenseOperator::operator+(const DenseOperator& o) const {
    require_same_dim(*this, o);
    DenseOperator r;
    r.m_ = m_ + o.m_;
    r.herm_ = herm_ && o.herm_;
    return r;
}
DenseOperator DenseOperator::operator-(const DenseOperator& o) const {
    require_same_dim(*this, o);
    DenseOperator r;
    r.m_ = m_ - o.m_;
    r.herm_ = herm_ && o.herm_;
    return r;
}
DenseOperator DenseOperator::operator*(const DenseOperator& o) const {
    require_same_dim(*this, o);
    DenseOperator r;
    r.m_ = m_ * o.m_;
    r.herm_ = false;
    return r;
}
DenseOperator DenseOperator::scaled(double s) const {
    DenseOperator r = *this;
    r.m_ *= s;
    return r;
}
DenseOperator DenseOperator::shifted(double s) const {
    DenseOperator r = *this;
    r.m_.diagonal().array() += s;
    return r;
}
DenseOperator DenseOperator::dagger() const {
    DenseOperator r;
    r.m_ = m_.adjoint();
    r.herm_ = herm_;
    return r;
}

DensityMatrix::DensityMatrix(DenseOperator op) : op_(std::move(op)) {
    if (!op_.hermitian()) throw ContractError("density matrix must be hermitian");
    const cplx tr = op_.matrix().trace();
    if (std::abs(tr - 1.0) > policy().trace_tol)
        throw ContractError("density matrix trace " + std::to_string(tr.real()) + " != 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(op_.matrix(), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().size() && es.eigenvalues()(0) < -policy().psd_tol)
        throw ContractError("density matrix has negative eigenvalue " + std::to_string(es.eigenvalues()(0)));
}

DensityMatrix DensityMatrix::from_pure(const Vec& psi) {
    Vec v = psi / psi.norm();
    Mat m = v * v.adjoint();
    m = 0.5 * (m + m.adjoint());
    return DensityMatrix(DenseOperator(std::move(m), true));
}

DenseOperator tensor_product(const DenseOperator& a, const DenseOperator& b) {
    const std::size_t d = static_cast<std::size_t>(a.dim()) * static_cast<std::size_t>(b.dim());
    if (d > policy().dim_cap) throw CapacityError("tensor product dimension " + std::to_string(d) + " exceeds cap");
    const Eigen::Index na = a.dim(), nb = b.dim();
    Mat m(na * nb, na * nb);
    for (Eigen::Index i = 0; i < na; ++i)
        for (Eigen::Index j = 0; j < na; ++j)
            m.block(i * nb, j * nb, nb, nb) = a.matrix()(i, j) * b.matrix();
    return DenseOperator(std::move(m), a.hermitian() && b.hermitian());
}

DenseOperator tensor_product(const std::vector<DenseOperator>& factors) {
    if (factors.empty()) return DenseOperator::identity(1);
    DenseOperator r = factors.front();
    for (std::size_t k = 1; k < factors.size(); ++k) r = tensor_product(r, factors[k]);
    return r;
}

DenseOperator commutator(const DenseOperator& a, const DenseOperator& b) {
    require_same_dim(a, b);
    Mat c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
    return DenseOperator(std::move(c), false);
}

Eigendecomposition hermitian_eigh(const DenseOperator& a) {
    if (!a.hermitian()) throw ContractError("hermitian_eigh requires the hermitian flag");
    Eigendecomposition out;
    const Mat& m = a.matrix();
    // Real symmetric input takes the faster real solver.
    if (max_abs(m.imag()) == 0.0) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.real());
        if (es.info() != Eigen::Success) throw Error("eigensolver failed");
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors().cast<cplx>();
    } else {
        Eigen::SelfAdjointEigenSolver<Mat> es(m);
        if (es.info() != Eigen::Success) throw Error("eigensolver failed");
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors();
    }
    return out;
}

DenseOperator evolve_unitary(const DenseOperator& q, const Eigendecomposition& h, double t, double hbar) {
    if (q.dim() != h.dim()) throw ShapeError("evolve_unitary: dimension mismatch");
    if (t == 0.0) return q;
    // U = V exp(-iEt/hbar) V^dag;  Q(t) = U^dag Q U
    Mat qe = h.to_eigenbasis(q.matrix());
    const Eigen::Index n = h.dim();
    Vec ph(n);
    for (Eigen::Index k = 0; k < n; ++k) ph(k) = std::polar(1.0, h.values(k) * t / hbar);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) qe(i, j) *= ph(i) * std::conj(ph(j));
    Mat r = h.from_eigenbasis(qe);
    if (q.hermitian()) r = 0.5 * (r + r.adjoint());
    return DenseOperator(std::move(r), q.hermitian());
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& dims, const std::vector<int>& keep) {
    long total = 1;
    for (int d : dims) {
        if (d <= 0) throw ShapeError("partial_trace: nonpositive factor dimension");
        total *= d;
    }
    if (total != rho.dim()) throw ShapeError("partial_trace: factor dims do not multiply to " + std::to_string(rho.dim()));
    const int nf = static_cast<int>(dims.size());
    std::vector<bool> kept(nf, false);
    for (int k : keep) {
        if (k < 0 || k >= nf) throw ShapeError("partial_trace: keep index out of range");
        kept[k] = true;
    }
    std::vector<long> stride(nf, 1);
    for (int f = nf - 2; f >= 0; --f) stride[f] = stride[f + 1] * dims[f + 1];
    long dk = 1;
    for (int f = 0; f < nf; ++f)
        if (kept[f]) dk *= dims[f];

    // Map each full index to (kept index, traced index).
    std::vector<long> kidx(total), tidx(total);
    for (long s = 0; s < total; ++s) {
        long ki = 0, ti = 0;
        for (int f = 0; f < nf; ++f) {
            const long digit = (s / stride[f]) % dims[f];
            if (kept[f]) ki = ki * dims[f] + digit;
            else ti = ti * dims[f] + digit;
        }
        kidx[s] = ki;
        tidx[s] = ti;
    }
    Mat r = Mat::Zero(dk, dk);
    const Mat& m = rho.matrix();
    for (long a = 0; a < total; ++a)
        for (long b = 0; b < total; ++b)
            if (tidx[a] == tidx[b]) r(kidx[a], kidx[b]) += m(a, b);
    r = 0.5 * (r + r.adjoint());
    return DensityMatrix(DenseOperator(std::move(r), true));
}

Vec purify(const DensityMatrix& rho) {
    // |psi> = sum_k sqrt(p_k) |k> (x) |k*>, system factor first.
    Eigen::SelfAdjointEigenSolver<Mat> es(rho.matrix());
    const Eigen::Index n = rho.dim();
    Vec psi = Vec::Zero(n * n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double p = std::max(0.0, es.eigenvalues()(k));
        if (p == 0.0) continue;
        const Vec& v = es.eigenvectors().col(k);
        for (Eigen::Index i = 0; i < n; ++i) psi(i * n + k) += std::sqrt(p) * v(i);
    }
    return psi / psi.norm();
}

double operator_norm(const DenseOperator& a) {
    if (!a.hermitian()) throw ContractError("operator_norm requires the hermitian flag");
    if (a.dim() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(a.matrix(), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

cplx trace_product(const Mat& a, const Mat& b) {
    // Tr(AB) = sum_ij A_ij B_ji
    return (a.array() * b.transpose().array()).sum();
}

double expectation(const DensityMatrix& rho, const DenseOperator& q) {
    if (rho.dim() != q.dim()) throw ShapeError("expectation: dimension mismatch");
    return trace_product(rho.matrix(), q.matrix()).real();
}

double variance(const DensityMatrix& rho, const DenseOperator& q) {
    const double m1 = expectation(rho, q);
    const double m2 = trace_product(rho.matrix(), q.matrix() * q.matrix()).real();
    return m2 - m1 * m1;
}

namespace pauli {
DenseOperator x() {
    Mat m(2, 2);
    m << 0, 1, 1, 0;
    return DenseOperator(m, true);
}
DenseOperator y() {
    Mat m(2, 2);
    m << 0, cplx(0, -1), cplx(0, 1), 0;
    return DenseOperator(m, true);
}
DenseOperator z() {
    Mat m(2, 2);
    m << 1, 0, 0, -1;
    return DenseOperator(m, true);
}
DenseOperator id() { return DenseOperator::identity(2); }
} // namespace pauli

} // namespace tub
