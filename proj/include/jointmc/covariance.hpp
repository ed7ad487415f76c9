#pragma once

// Block-Toeplitz joint covariance model for two correlated datasets.
//
// Each dataset's M x M covariance block is a symmetric Toeplitz matrix with
// geometric decay: entry (i, j) = upsilon^(|i-j|/(M-1)), so the diagonal is 1
// and the correlation at lag M-1 is exactly the tail parameter upsilon. The
// joint 2M x 2M covariance places the two blocks on the diagonal and couples
// them through psi * Sigma11 off the diagonal. Columns of a dataset pair are
// i.i.d. zero-mean Gaussian vectors with this covariance.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "jointmc/errors.hpp"
#include "jointmc/matrix_ops.hpp"
#include "jointmc/rng.hpp"

namespace jointmc {

struct ToeplitzBlockSpec {
    int size = 0;                   // M, rows per dataset
    double tail_correlation = 0.0;  // correlation at lag size-1, in [0, 1)
    Matrix matrix;                  // size x size symmetric Toeplitz, unit diagonal
};

inline ToeplitzBlockSpec build_toeplitz_block(int size, double tail_correlation) {
    if (size < 2) {
        throw InvalidParameterError("Toeplitz block size must be >= 2, got " +
                                    std::to_string(size));
    }
    if (!(tail_correlation >= 0.0 && tail_correlation < 1.0)) {
        throw InvalidParameterError("tail correlation must lie in [0, 1), got " +
                                    std::to_string(tail_correlation));
    }
    std::vector<double> lag(static_cast<std::size_t>(size));
    lag[0] = 1.0;
    for (int l = 1; l < size; ++l) {
        // pow(t, 1.0) == t, so the entry at lag size-1 is the tail exactly.
        lag[static_cast<std::size_t>(l)] =
            tail_correlation == 0.0
                ? 0.0
                : std::pow(tail_correlation, static_cast<double>(l) / (size - 1));
    }
    ToeplitzBlockSpec spec{size, tail_correlation, Matrix(size, size)};
    for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) {
            spec.matrix(i, j) = lag[static_cast<std::size_t>(std::abs(i - j))];
        }
    }
    return spec;
}

// Cholesky factorization tolerant of positive semidefinite input: pivots
// within pivot_rel_tol * max diagonal of zero are zeroed together with their
// column (valid for PSD matrices, where a vanishing pivot forces the residual
// column to vanish; the residual is checked). A pivot below -tolerance throws
// with the 1-based order of the failing leading minor.
inline Matrix tolerant_cholesky(const Matrix& a, double pivot_rel_tol = 1e-10) {
    const Eigen::Index n = a.rows();
    if (a.cols() != n) throw ShapeError("cholesky requires a square matrix");
    const double scale = std::max(a.diagonal().maxCoeff(), 0.0);
    const double tol = pivot_rel_tol * std::max(scale, 1e-300);
    const double column_tol = 1e3 * std::sqrt(tol) * std::sqrt(std::max(scale, 1e-300));
    Matrix l = Matrix::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double d = a(k, k) - l.row(k).head(k).squaredNorm();
        if (d < -tol) {
            throw NotPositiveSemidefiniteError(
                "matrix is not positive semidefinite; leading minor of order " +
                    std::to_string(k + 1) + " is not positive",
                static_cast<int>(k + 1));
        }
        if (d <= tol) {
            // Semidefinite direction: keep the zero pivot, verify the residual
            // column is numerically zero as PSD demands.
            for (Eigen::Index i = k + 1; i < n; ++i) {
                const double resid = a(i, k) - l.row(i).head(k).dot(l.row(k).head(k));
                if (std::abs(resid) > column_tol) {
                    throw NotPositiveSemidefiniteError(
                        "matrix is not positive semidefinite; zero pivot at order " +
                            std::to_string(k + 1) + " has a nonzero residual column",
                        static_cast<int>(k + 1));
                }
            }
            continue;
        }
        l(k, k) = std::sqrt(d);
        for (Eigen::Index i = k + 1; i < n; ++i) {
            l(i, k) = (a(i, k) - l.row(i).head(k).dot(l.row(k).head(k))) / l(k, k);
        }
    }
    return l;
}

struct CovarianceSpec {
    ToeplitzBlockSpec block1;  // Sigma11
    ToeplitzBlockSpec block2;  // Sigma22
    double cross_scale = 0.0;  // psi in [0, 1]
    Matrix realized;           // 2M x 2M: [[S11, psi*S11], [psi*S11, S22]]
    Matrix factor;             // factor * factor^T == realized (1e-10 relative)

    int block_size() const { return block1.size; }
};

inline CovarianceSpec build_joint_covariance(const ToeplitzBlockSpec& block1,
                                             const ToeplitzBlockSpec& block2,
                                             double cross_scale) {
    if (block1.size != block2.size) {
        throw InvalidParameterError("covariance blocks must share a size");
    }
    if (!(cross_scale >= 0.0 && cross_scale <= 1.0)) {
        throw InvalidParameterError("cross scale must lie in [0, 1], got " +
                                    std::to_string(cross_scale));
    }
    const int m = block1.size;
    CovarianceSpec spec{block1, block2, cross_scale, Matrix(2 * m, 2 * m), Matrix()};
    spec.realized.topLeftCorner(m, m) = block1.matrix;
    spec.realized.bottomRightCorner(m, m) = block2.matrix;
    spec.realized.topRightCorner(m, m) = cross_scale * block1.matrix;
    spec.realized.bottomLeftCorner(m, m) = cross_scale * block1.matrix;
    spec.factor = tolerant_cholesky(spec.realized);
    const double rel =
        (spec.factor * spec.factor.transpose() - spec.realized).norm() / spec.realized.norm();
    if (!(rel <= 1e-10)) {
        throw NotPositiveSemidefiniteError(
            "factorization failed to reproduce the covariance (relative error " +
                std::to_string(rel) + ")",
            2 * m);
    }
    return spec;
}

struct DatasetPair {
    Matrix m1;       // M x N
    Matrix m2;       // M x N
    Matrix stacked;  // 2M x N, rows [0, M) = m1, rows [M, 2M) = m2
    int r1 = 0;      // effective ranks under the 1e-3 energy rule
    int r2 = 0;
    int r = 0;

    static DatasetPair from_stacked(const Matrix& stacked) {
        const Eigen::Index m = stacked.rows() / 2;
        DatasetPair pair;
        pair.m1 = stacked.topRows(m);
        pair.m2 = stacked.bottomRows(m);
        pair.stacked = stacked;
        pair.r1 = effective_rank(pair.m1);
        pair.r2 = effective_rank(pair.m2);
        pair.r = effective_rank(pair.stacked);
        return pair;
    }
};

// Draws n_columns i.i.d. N(0, Sigma) columns as factor * z with z addressed
// by (seed, row, column); deterministic given the seed. The effective-rank
// bounds max(r1, r2) <= r <= r1 + r2 are checked on the sample.
inline DatasetPair sample_columns(const CovarianceSpec& spec, int n_columns,
                                  std::uint64_t seed) {
    if (n_columns < 1) {
        throw InvalidParameterError("need at least one column");
    }
    const Eigen::Index rows = spec.realized.rows();
    Matrix z(rows, n_columns);
    for (Eigen::Index j = 0; j < n_columns; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) {
            z(i, j) = normal_at(seed, i, j);
        }
    }
    DatasetPair pair = DatasetPair::from_stacked(spec.factor * z);
    if (!(std::max(pair.r1, pair.r2) <= pair.r && pair.r <= pair.r1 + pair.r2)) {
        throw Error("rank-bound-violation",
                    "sampled effective ranks violate the stack bounds: r1=" +
                        std::to_string(pair.r1) + " r2=" + std::to_string(pair.r2) +
                        " r=" + std::to_string(pair.r));
    }
    return pair;
}

namespace detail {

// Effective rank of an M x n_columns sample drawn from a single Toeplitz
// block, with normal variates taken from rows [row_offset, row_offset+M) of
// the seed's entry-addressed field. With row_offset = 0 this is exactly the
// top half of a 2M-row joint sample under the same seed.
inline int block_sample_rank(int size, double tail, int n_columns, std::uint64_t seed,
                             int row_offset) {
    const ToeplitzBlockSpec block = build_toeplitz_block(size, tail);
    const Matrix chol = tolerant_cholesky(block.matrix);
    Matrix z(size, n_columns);
    for (int j = 0; j < n_columns; ++j) {
        for (int i = 0; i < size; ++i) {
            z(i, j) = normal_at(seed, row_offset + i, j);
        }
    }
    return effective_rank(chol * z);
}

// Locates the parameter interval on which an integer-valued, nonincreasing
// rank function hits `target` and returns its midpoint. `rank_at` maps a
// parameter in [lo, hi] to a rank (or a negative value for infeasible
// parameters, which are treated like ranks below the target).
template <typename RankFn>
double plateau_midpoint(const RankFn& rank_at, int target, double lo, double hi,
                        int max_bisection_steps = 60) {
    int rank_lo = rank_at(lo);
    int rank_hi = rank_at(hi);
    double hit = std::numeric_limits<double>::quiet_NaN();
    if (rank_lo == target) {
        hit = lo;
    } else if (rank_hi == target) {
        hit = hi;
    } else if (rank_lo > target && (rank_hi < target || rank_hi < 0)) {
        double a = lo, b = hi;
        for (int step = 0; step < max_bisection_steps; ++step) {
            const double mid = 0.5 * (a + b);
            const int rm = rank_at(mid);
            if (rm == target) {
                hit = mid;
                break;
            }
            if (rm > target) {
                a = mid;
            } else {
                b = mid;
            }
        }
    }
    if (std::isnan(hit)) {
        // Grid fallback for non-monotone stretches.
        constexpr int kGrid = 512;
        for (int g = 1; g < kGrid; ++g) {
            const double x = lo + (hi - lo) * g / kGrid;
            if (rank_at(x) == target) {
                hit = x;
                break;
            }
        }
    }
    if (std::isnan(hit)) {
        throw CalibrationFailedError("no parameter value reaches rank " +
                                     std::to_string(target));
    }
    // Refine both plateau edges, then take the midpoint; a centered value is
    // insensitive to realization-to-realization jitter of the edges.
    double left = lo;
    if (rank_at(lo) != target) {
        double a = lo, b = hit;
        for (int step = 0; step < 40; ++step) {
            const double mid = 0.5 * (a + b);
            if (rank_at(mid) == target) {
                b = mid;
            } else {
                a = mid;
            }
        }
        left = b;
    }
    double right = hi;
    if (rank_at(hi) != target) {
        double a = hit, b = hi;
        for (int step = 0; step < 40; ++step) {
            const double mid = 0.5 * (a + b);
            if (rank_at(mid) == target) {
                a = mid;
            } else {
                b = mid;
            }
        }
        right = a;
    }
    const double mid = 0.5 * (left + right);
    return rank_at(mid) == target ? mid : hit;
}

}  // namespace detail

// Finds a tail correlation whose fixed-seed block sample has the target
// effective rank; returns the midpoint of the achieving interval. The rank is
// nonincreasing in the tail in practice; a grid scan backs up the bisection.
inline double calibrate_tail(int target_rank, int size, int n_columns, std::uint64_t seed,
                             int row_offset = 0) {
    if (target_rank < 1 || target_rank > std::min(size, n_columns)) {
        throw InvalidParameterError("target rank must lie in [1, min(size, columns)]");
    }
    const auto rank_at = [&](double tail) {
        return detail::block_sample_rank(size, tail, n_columns, seed, row_offset);
    };
    return detail::plateau_midpoint(rank_at, target_rank, 0.0, 1.0 - 1e-12);
}

}  // namespace jointmc
