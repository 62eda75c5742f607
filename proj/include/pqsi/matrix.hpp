// matrix.hpp
// Complex square matrices and the numerical tolerance checks shared by the
// quantum state and measurement types.

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>

namespace pqsi {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Tolerances: double-precision QR and matrix products accumulate ~1e-13 error
// at d <= 64; margins sit three orders of magnitude above that.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-9;        // min eigenvalue >= -kPsdTol
inline constexpr double kUnitaryTol = 1e-9;    // max |U'U - I| entrywise
inline constexpr double kTieMargin = 1e-9;     // top-two purity separation
inline constexpr double kImagResidualTol = 1e-12;

inline double max_abs(const CMatrix& a) { return a.cwiseAbs().maxCoeff(); }

inline double hermiticity_error(const CMatrix& a) {
    return max_abs(a - a.adjoint());
}

inline double unitarity_error(const CMatrix& u) {
    return max_abs(u.adjoint() * u - CMatrix::Identity(u.rows(), u.cols()));
}

inline void require_square(const CMatrix& a, const char* what) {
    if (a.rows() != a.cols() || a.rows() < 2)
        throw std::invalid_argument(std::string(what) + ": matrix must be square with dim >= 2");
}

inline void require_hermitian(const CMatrix& a, const char* what,
                              double tol = kHermitianTol) {
    require_square(a, what);
    if (hermiticity_error(a) > tol)
        throw std::invalid_argument(std::string(what) + ": matrix is not Hermitian within tolerance");
}

inline Eigen::VectorXd hermitian_eigenvalues(const CMatrix& a) {
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(a, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

// Tr(A B) for same-dimension matrices, computed entrywise in O(d^2).
inline Complex trace_product(const CMatrix& a, const CMatrix& b) {
    return (a.transpose().cwiseProduct(b)).sum();
}

}  // namespace pqsi
