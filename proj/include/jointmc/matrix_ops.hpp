#pragma once

// Spectral primitives shared by the recovery algorithms: thin SVD with a
// deterministic sign convention, Eckart-Young truncation, effective rank
// under the relative-energy rule, NMSE, and singular-value soft-thresholding.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>
#include <string>
#include <vector>

#include "jointmc/errors.hpp"

namespace jointmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct SpectralDecomposition {
    Matrix left_vectors;     // rows x k, orthonormal columns
    Vector singular_values;  // k, nonincreasing, nonnegative
    Matrix right_vectors;    // cols x k, orthonormal columns

    Matrix reconstruct() const {
        return left_vectors * singular_values.asDiagonal() * right_vectors.transpose();
    }
};

// Thin SVD of a tall-or-square matrix (rows >= cols is enforced globally,
// matching the stacked-data orientation used throughout). Singular values are
// nonincreasing; each left vector is flipped so its largest-magnitude entry
// (first such index on ties) is nonnegative, which pins the decomposition to
// a unique representative when values are distinct.
inline SpectralDecomposition svd(const Matrix& matrix) {
    if (matrix.rows() < matrix.cols()) {
        throw ShapeError("svd requires rows >= cols, got " + std::to_string(matrix.rows()) +
                         "x" + std::to_string(matrix.cols()));
    }
    Eigen::BDCSVD<Matrix> solver(matrix, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (solver.info() != Eigen::Success) {
        throw SvdConvergenceError("SVD backend did not converge");
    }
    SpectralDecomposition dec{solver.matrixU(), solver.singularValues(), solver.matrixV()};
    for (Eigen::Index j = 0; j < dec.left_vectors.cols(); ++j) {
        Eigen::Index peak = 0;
        dec.left_vectors.col(j).cwiseAbs().maxCoeff(&peak);
        if (dec.left_vectors(peak, j) < 0.0) {
            dec.left_vectors.col(j) *= -1.0;
            dec.right_vectors.col(j) *= -1.0;
        }
    }
    return dec;
}

// Singular values regardless of orientation (spectrum is transpose-invariant).
inline Vector singular_values(const Matrix& matrix) {
    Eigen::BDCSVD<Matrix> solver(matrix);
    if (solver.info() != Eigen::Success) {
        throw SvdConvergenceError("SVD backend did not converge");
    }
    return solver.singularValues();
}

// Best rank-r approximation in Frobenius norm.
inline Matrix truncate(const Matrix& matrix, Eigen::Index rank) {
    if (rank < 0 || rank > matrix.cols()) {
        throw InvalidParameterError("truncation rank " + std::to_string(rank) +
                                    " outside [0, " + std::to_string(matrix.cols()) + "]");
    }
    if (rank == 0) return Matrix::Zero(matrix.rows(), matrix.cols());
    const SpectralDecomposition dec = svd(matrix);
    return dec.left_vectors.leftCols(rank) *
           dec.singular_values.head(rank).asDiagonal() *
           dec.right_vectors.leftCols(rank).transpose();
}

// Smallest r whose trailing singular-value energy falls below
// tolerance * total energy, i.e. NMSE(matrix, truncate(matrix, r)) < tolerance.
inline int effective_rank(const Matrix& matrix, double tolerance = 1e-3) {
    Vector s = matrix.rows() >= matrix.cols() ? singular_values(matrix)
                                              : singular_values(matrix.transpose());
    const Eigen::Index k = s.size();
    // Suffix sums keep the tiny tail accurate.
    double total = 0.0;
    std::vector<double> tail(static_cast<std::size_t>(k) + 1, 0.0);
    for (Eigen::Index i = k - 1; i >= 0; --i) {
        total += s(i) * s(i);
        tail[static_cast<std::size_t>(i)] = total;
    }
    if (total == 0.0) {
        throw ZeroMatrixError("effective rank undefined for the zero matrix");
    }
    for (Eigen::Index r = 0; r <= k; ++r) {
        if (tail[static_cast<std::size_t>(r)] < tolerance * total) return static_cast<int>(r);
    }
    return static_cast<int>(k);  // unreachable: tail[k] == 0
}

// ||reference - estimate||_F^2 / ||reference||_F^2 for one realization.
inline double nmse(const Matrix& reference, const Matrix& estimate) {
    if (reference.rows() != estimate.rows() || reference.cols() != estimate.cols()) {
        throw ShapeError("nmse shape mismatch");
    }
    const double denom = reference.squaredNorm();
    if (denom == 0.0) {
        throw ZeroMatrixError("nmse undefined for a zero reference");
    }
    return (reference - estimate).squaredNorm() / denom;
}

// Singular-value soft-thresholding D_tau: shrinks every singular value by tau,
// clamping at zero.
inline Matrix soft_threshold(const Matrix& matrix, double tau) {
    if (!(tau >= 0.0)) {
        throw InvalidParameterError("soft_threshold requires tau >= 0");
    }
    const SpectralDecomposition dec = svd(matrix);
    Vector shrunk = (dec.singular_values.array() - tau).cwiseMax(0.0).matrix();
    return dec.left_vectors * shrunk.asDiagonal() * dec.right_vectors.transpose();
}

}  // namespace jointmc
