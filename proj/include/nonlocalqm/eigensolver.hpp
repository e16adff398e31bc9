#pragma once

// Dense Hermitian eigensolver (Householder tridiagonalization + implicit QL).

#include <complex>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "nonlocalqm/error.hpp"

namespace nonlocalqm {

struct HermitianEigen {
    Eigen::VectorXd values;    // ascending
    Eigen::MatrixXcd vectors;  // orthonormal columns
};

namespace detail {

inline bool is_real(const Eigen::MatrixXcd& a) {
    return (a.imag().array() == 0.0).all();
}

}  // namespace detail

/// Full eigendecomposition of the Hermitian part (A + A^H)/2.
inline HermitianEigen hermitian_eigen(const Eigen::MatrixXcd& a) {
    constexpr std::string_view op = "hermitian_eigen";
    require(a.rows() == a.cols(), ErrorKind::invalid_argument, op, "matrix is not square");
    HermitianEigen out;
    if (detail::is_real(a)) {
        const Eigen::MatrixXd s = 0.5 * (a.real() + a.real().transpose());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
        require(es.info() == Eigen::Success, ErrorKind::invalid_state, op, "eigensolver did not converge");
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors().cast<std::complex<double>>();
    } else {
        const Eigen::MatrixXcd s = 0.5 * (a + a.adjoint());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(s);
        require(es.info() == Eigen::Success, ErrorKind::invalid_state, op, "eigensolver did not converge");
        out.values = es.eigenvalues();
        out.vectors = es.eigenvectors();
    }
    return out;
}

/// Lowest `count` eigenpairs of the Hermitian part.
inline HermitianEigen hermitian_eigen_lowest(const Eigen::MatrixXcd& a, Eigen::Index count) {
    require(a.rows() == a.cols(), ErrorKind::invalid_argument, "hermitian_eigen_lowest", "matrix is not square");
    require(count >= 1 && count <= a.rows(), ErrorKind::invalid_argument, "hermitian_eigen_lowest",
            "level count out of range");
    HermitianEigen full = hermitian_eigen(a);
    return {full.values.head(count), full.vectors.leftCols(count)};
}

}  // namespace nonlocalqm
