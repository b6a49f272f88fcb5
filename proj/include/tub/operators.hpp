#pragma once
// Dense operator algebra on small Hilbert spaces.
#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace tub {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

class DenseOperator {
public:
    DenseOperator() = default;
    // Validates squareness and, when hermitian is set, Hermiticity.
    DenseOperator(Mat m, bool hermitian);

    static DenseOperator identity(Eigen::Index n);
    static DenseOperator zero(Eigen::Index n);
    static DenseOperator diagonal(const RVec& d);

    Eigen::Index dim() const { return m_.rows(); }
    const Mat& matrix() const { return m_; }
    bool hermitian() const { return herm_; }

    DenseOperator operator+(const DenseOperator& o) const;
    DenseOperator operator-(const DenseOperator& o) const;
    DenseOperator operator*(const DenseOperator& o) const;   // hermitian flag dropped
    DenseOperator scaled(double s) const;
    DenseOperator shifted(double s) const;                  // A + s*I
    DenseOperator dagger() const;

private:
    Mat m_;
    bool herm_ = false;
};

class DensityMatrix {
public:
    DensityMatrix() = default;
    explicit DensityMatrix(DenseOperator op);   // checks trace and PSD
    static DensityMatrix from_pure(const Vec& psi);

    const DenseOperator& op() const { return op_; }
    const Mat& matrix() const { return op_.matrix(); }
    Eigen::Index dim() const { return op_.dim(); }

private:
    DenseOperator op_;
};

struct Eigendecomposition {
    RVec values;   // ascending
    Mat vectors;   // columns are eigenvectors

    Eigen::Index dim() const { return values.size(); }
    double range() const { return values.size() ? values(values.size() - 1) - values(0) : 0.0; }
    // Operator expressed in this eigenbasis, U^dag A U.
    Mat to_eigenbasis(const Mat& a) const { return vectors.adjoint() * a * vectors; }
    Mat from_eigenbasis(const Mat& a) const { return vectors * a * vectors.adjoint(); }
};

DenseOperator tensor_product(const DenseOperator& a, const DenseOperator& b);
DenseOperator tensor_product(const std::vector<DenseOperator>& factors);
DenseOperator commutator(const DenseOperator& a, const DenseOperator& b);
Eigendecomposition hermitian_eigh(const DenseOperator& a);
DenseOperator evolve_unitary(const DenseOperator& q, const Eigendecomposition& h, double t, double hbar);
// dims: factor dimensions (product must equal rho.dim()); keep: indices of kept factors.
DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<int>& dims, const std::vector<int>& keep);
// Returns |psi> on H (x) H_ancilla with ancilla dimension rho.dim(); system factor first.
Vec purify(const DensityMatrix& rho);
double operator_norm(const DenseOperator& a);

// Small helpers used throughout.
double expectation(const DensityMatrix& rho, const DenseOperator& q);
double variance(const DensityMatrix& rho, const DenseOperator& q);
cplx trace_product(const Mat& a, const Mat& b);   // Tr(AB) without forming AB
double max_abs(const Mat& a);

namespace pauli {
DenseOperator x();
DenseOperator y();
DenseOperator z();
DenseOperator id();
} // namespace pauli

} // namespace tub
