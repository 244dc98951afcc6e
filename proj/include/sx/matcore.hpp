#pragma once

#include <Eigen/Dense>
#include <string>

#include "sx/errors.hpp"

namespace sx {

// Dense row-major real matrices. All numeric state in the toolkit is double;
// reduced precisions exist only as bit counts in the storage/energy accounting.
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Matrix = Mat<double>;

/// True when every entry is finite (no NaN/Inf).
template <class Derived>
bool is_finite(const Eigen::MatrixBase<Derived>& a) {
    return a.allFinite();
}

/// Checked constructor used at ingestion boundaries.
Matrix make_matrix(Eigen::Index rows, Eigen::Index cols, const double* data);

/// a * b with an explicit shape check.
Matrix matmul(const Matrix& a, const Matrix& b);

/// Frobenius norm, sqrt(sum a_ij^2).
template <class Derived>
double frob_norm(const Eigen::MatrixBase<Derived>& a) {
    return a.norm();
}

/// Least-squares solve: X minimizing ||a X - y||_F via ridge-stabilized normal
/// equations (a^T a + eps I) X = a^T y, eps = 1e-12 * trace(a^T a) / cols.
/// An all-zero a yields an all-zero X.
Matrix solve_lsq(const Matrix& a, const Matrix& y);

}  // namespace sx
