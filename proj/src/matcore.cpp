#include "sx/matcore.hpp"

namespace sx {

Matrix make_matrix(Eigen::Index rows, Eigen::Index cols, const double* data) {
    if (rows < 0 || cols < 0) throw shape_error("make_matrix: negative dimension");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows * cols; ++i) m.data()[i] = data[i];
    if (!is_finite(m)) throw shape_error("make_matrix: non-finite entry");
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw shape_error("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.rows()) + ")");
    }
    return a * b;
}

Matrix solve_lsq(const Matrix& a, const Matrix& y) {
    if (a.rows() != y.rows()) throw shape_error("solve_lsq: row counts differ");
    if (a.rows() < 1) throw shape_error("solve_lsq: empty system");
    const Eigen::Index n = a.cols();
    Matrix gram = a.transpose() * a;
    const double tr = gram.trace();
    if (tr == 0.0) return Matrix::Zero(n, y.cols());
    const double eps = 1e-12 * tr / static_cast<double>(n);
    gram.diagonal().array() += eps;
    Matrix rhs = a.transpose() * y;
    return gram.ldlt().solve(rhs);
}

}  // namespace sx
