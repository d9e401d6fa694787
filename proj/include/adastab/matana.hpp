#ifndef ADASTAB_MATANA_HPP
#define ADASTAB_MATANA_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <complex>
#include <limits>
#include <optional>
#include <vector>

#include "adastab/common.hpp"

// Matrix classification: M-matrices, H-matrices, generalized diagonal
// dominance scalings, and matrix measures for the 1- and infinity norms.

namespace adastab {

inline constexpr double kDefaultTol = 1e-9;

/// Comparison matrix: |a_ii| on the diagonal, -|a_ij| off the diagonal.
inline Matrix comparison_matrix(const Matrix& A) {
    Matrix M = -A.cwiseAbs();
    M.diagonal() = A.diagonal().cwiseAbs();
    return M;
}

/// M-matrix test for a Z-matrix: non-positive off-diagonals and a positive
/// solution d of A*d = 1. For Z-matrices the latter is equivalent to all
/// eigenvalues having positive real parts, and d doubles as a generalized
/// diagonal-dominance certificate.
inline bool is_m_matrix(const Matrix& A, double tol = kDefaultTol) {
    const auto n = A.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            if (i != j && A(i, j) > tol) return false;
    Eigen::FullPivLU<Matrix> lu(A);
    if (!lu.isInvertible()) return false;  // singular: not an M-matrix
    const Vector d = lu.solve(Vector::Ones(n));
    return (d.array() > tol).all();
}

inline bool is_h_matrix(const Matrix& A, double tol = kDefaultTol) {
    return is_m_matrix(comparison_matrix(A), tol);
}

/// Row scaling d for an H-matrix A: solves M_A * d = 1, so that
/// |a_ii| d_i - sum_{j != i} |a_ij| d_j = 1 > 0 for every row.
/// Normalized so max entry = 1. Absent when A is not an H-matrix.
inline std::optional<Vector> find_row_scaling(const Matrix& A, double tol = kDefaultTol) {
    const auto n = A.rows();
    const Matrix M = comparison_matrix(A);
    Eigen::FullPivLU<Matrix> lu(M);
    if (!lu.isInvertible()) return std::nullopt;
    Vector d = lu.solve(Vector::Ones(n));
    if (!(d.array() > tol).all()) return std::nullopt;
    // The solve must certify unit dominance margin before normalization.
    const Vector margin = M * d;
    if (!(margin.array() >= 1.0 - tol).all()) return std::nullopt;
    d /= d.maxCoeff();
    return d;
}

/// Column scaling via the transpose: A is an H-matrix iff A^T is.
inline std::optional<Vector> find_column_scaling(const Matrix& A, double tol = kDefaultTol) {
    return find_row_scaling(A.transpose(), tol);
}

inline bool is_generalized_row_dominant(const Matrix& A, const Vector& x) {
    const auto n = A.rows();
    if (x.size() != n)
        throw DimensionMismatch("is_generalized_row_dominant: vector length mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        double off = 0.0;
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i) off += std::abs(A(i, j)) * x(j);
        if (!(std::abs(A(i, i)) * x(i) > off)) return false;
    }
    return true;
}

inline bool is_generalized_column_dominant(const Matrix& A, const Vector& x) {
    const auto n = A.rows();
    if (x.size() != n)
        throw DimensionMismatch("is_generalized_column_dominant: vector length mismatch");
    for (Eigen::Index j = 0; j < n; ++j) {
        double off = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != j) off += std::abs(A(i, j)) * x(i);
        if (!(std::abs(A(j, j)) * x(j) > off)) return false;
    }
    return true;
}

/// Matrix measure induced by the vector 1-norm (column sums).
inline double measure_one_norm(const Matrix& A) {
    const auto n = A.cols();
    double mu = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
        double s = A(j, j);
        for (Eigen::Index i = 0; i < n; ++i)
            if (i != j) s += std::abs(A(i, j));
        mu = std::max(mu, s);
    }
    return mu;
}

/// Matrix measure induced by the vector infinity-norm (row sums).
inline double measure_inf_norm(const Matrix& A) {
    return measure_one_norm(A.transpose());
}

inline std::vector<std::complex<double>> eigenvalues(const Matrix& A) {
    Eigen::EigenSolver<Matrix> es(A, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw ConvergenceFailure("eigenvalue computation did not converge");
    const auto& ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

inline bool has_positive_diagonal(const Matrix& A, double tol = kDefaultTol) {
    return (A.diagonal().array() > tol).all();
}

struct Classification {
    Eigen::Index n = 0;
    bool is_m_matrix = false;
    bool is_h_matrix = false;
    bool has_positive_diagonal = false;
    std::optional<Vector> row_scaling;
    std::optional<Vector> column_scaling;
    std::vector<std::complex<double>> eigenvalues_of_comparison;
};

inline Classification classify(const Matrix& A, double tol = kDefaultTol) {
    Classification c;
    c.n = A.rows();
    c.is_m_matrix = is_m_matrix(A, tol);
    c.is_h_matrix = is_h_matrix(A, tol);
    c.has_positive_diagonal = has_positive_diagonal(A, tol);
    c.row_scaling = find_row_scaling(A, tol);
    c.column_scaling = find_column_scaling(A, tol);
    c.eigenvalues_of_comparison = eigenvalues(comparison_matrix(A));
    return c;
}

}  // namespace adastab

#endif  // ADASTAB_MATANA_HPP
