#pragma once

// Bayesian Singular Value Thresholding: SVT iterations augmented with an
// LMMSE completion of the unobserved entries from the prior covariance, and a
// per-iteration threshold chosen by minimizing Stein's unbiased risk estimate
// (SURE) for the soft-thresholding estimator.
//
// Per iteration k (Y0 = Z0 = 0, tau0 = 0):
//   X_k = D_{tau_{k-1}}(Z_{k-1});  stop when the relative observed residual
//     drops to the tolerance;
//   Y_k = Y_{k-1} + step * (P_Omega(R) - P_Omega(X_k));
//   L_k = conditional mean of the unobserved entries given Y_k (column-wise,
//     supported on the complement of Omega);
//   Z_k = Y_k + L_k;
//   sigma_Z^2 = (||Y_k - P_Omega(R)||_F^2 + |Omega^c| * D_LMMSE) / (2MN);
//   tau_k = argmin_tau SURE(D_tau)(Z_k).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "jointmc/acquisition.hpp"
#include "jointmc/covariance.hpp"
#include "jointmc/errors.hpp"
#include "jointmc/matrix_ops.hpp"
#include "jointmc/svt.hpp"

namespace jointmc {

struct BsvtParams {
    double step = 1.0;
    double tolerance = 1e-4;
    int max_iterations = 500;
    // Relative gap (against the largest singular value) under which two
    // singular values count as repeated, zeroing the divergence.
    double degeneracy_tolerance = 1e-10;
};

struct SureEvaluation {
    double tau = 0.0;
    double risk_estimate = 0.0;
    double divergence = 0.0;
    double sigma_sq = 0.0;
};

// Closed-form divergence of the soft-thresholding estimator D_tau at a matrix
// with the given singular values (nonincreasing, length N, rows >= N):
//   sum_i [ 1(s_i > tau) + (rows - N) (s_i - tau)_+ / s_i ]
//   + 2 sum_{i != j} s_i (s_i - tau)_+ / (s_i^2 - s_j^2),
// with terms at s_i = 0 contributing 0. If any two values are repeated
// (relative to the largest), the divergence is defined as 0.
inline double divergence(const Vector& singular_values, double tau, Eigen::Index rows,
                         double degeneracy_tolerance = 1e-10) {
    const Eigen::Index n = singular_values.size();
    if (rows < n) {
        throw InvalidParameterError("divergence requires rows >= number of singular values");
    }
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (singular_values(i) < singular_values(i + 1)) {
            throw InvalidParameterError("singular values must be nonincreasing");
        }
    }
    if (n > 0 && singular_values(n - 1) < 0.0) {
        throw InvalidParameterError("singular values must be nonnegative");
    }
    if (n == 0) return 0.0;
    const double largest = singular_values(0);
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (singular_values(i) - singular_values(i + 1) <= degeneracy_tolerance * largest) {
            return 0.0;
        }
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double si = singular_values(i);
        const double shrunk = std::max(si - tau, 0.0);
        if (si > tau) total += 1.0;
        if (si > 0.0) total += static_cast<double>(rows - n) * shrunk / si;
        if (shrunk > 0.0) {
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                const double sj = singular_values(j);
                total += 2.0 * si * shrunk / (si * si - sj * sj);
            }
        }
    }
    return total;
}

// SURE(D_tau)(Z) = -rows*cols*sigma^2 + sum_i min(tau^2, s_i^2)
//                  + 2 sigma^2 div(D_tau(Z)).
inline SureEvaluation sure(const Vector& singular_values, double tau, double sigma_sq,
                           Eigen::Index rows, Eigen::Index cols,
                           double degeneracy_tolerance = 1e-10) {
    if (!(sigma_sq > 0.0)) {
        throw InvalidParameterError("sure requires a positive noise variance");
    }
    if (singular_values.size() != cols) {
        throw ShapeError("sure expects one singular value per column");
    }
    SureEvaluation eval;
    eval.tau = tau;
    eval.sigma_sq = sigma_sq;
    eval.divergence = divergence(singular_values, tau, rows, degeneracy_tolerance);
    double data_term = 0.0;
    for (Eigen::Index i = 0; i < cols; ++i) {
        data_term += std::min(tau * tau, singular_values(i) * singular_values(i));
    }
    eval.risk_estimate = -static_cast<double>(rows * cols) * sigma_sq + data_term +
                         2.0 * sigma_sq * eval.divergence;
    return eval;
}

// Minimizes SURE over {0} U {s_i} U {midpoints of consecutive s_i}, then over
// a 50-point uniform refinement of the interval bracketing the grid
// minimizer. Ties break toward the larger tau (the lower-rank estimate).
inline double optimize_tau(const SpectralDecomposition& decomposition, double sigma_sq,
                           double degeneracy_tolerance = 1e-10) {
    if (!(sigma_sq > 0.0)) {
        throw InvalidParameterError("optimize_tau requires a positive noise variance");
    }
    const Vector& s = decomposition.singular_values;
    const Eigen::Index rows = decomposition.left_vectors.rows();
    const Eigen::Index cols = s.size();

    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(2 * cols) + 1);
    grid.push_back(0.0);
    for (Eigen::Index i = 0; i < cols; ++i) grid.push_back(s(i));
    for (Eigen::Index i = 0; i + 1 < cols; ++i) grid.push_back(0.5 * (s(i) + s(i + 1)));
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    const auto risk_at = [&](double tau) {
        return sure(s, tau, sigma_sq, rows, cols, degeneracy_tolerance).risk_estimate;
    };
    double best_tau = grid.front();
    double best_risk = risk_at(best_tau);
    std::size_t best_index = 0;
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double risk = risk_at(grid[i]);
        if (risk <= best_risk) {
            best_risk = risk;
            best_tau = grid[i];
            best_index = i;
        }
    }
    const double lo = grid[best_index > 0 ? best_index - 1 : 0];
    const double hi = grid[std::min(best_index + 1, grid.size() - 1)];
    if (hi > lo) {
        for (int j = 0; j < 50; ++j) {
            const double tau = lo + (hi - lo) * j / 49.0;
            const double risk = risk_at(tau);
            if (risk < best_risk || (risk == best_risk && tau > best_tau)) {
                best_risk = risk;
                best_tau = tau;
            }
        }
    }
    return best_tau;
}

namespace detail {

// Column-wise conditional-Gaussian machinery for a fixed (covariance, mask)
// pair. The mask is constant across BSVT iterations, so the per-column
// regression matrices W_j = Sigma[C,O] (Sigma[O,O] + ridge I)^{-1} and the
// per-column residual variances are computed once and reused.
class LmmseOperator {
public:
    LmmseOperator(const CovarianceSpec& spec, const ObservationSet& obs) {
        const Eigen::Index rows = obs.rows;
        if (spec.realized.rows() != rows) {
            throw ShapeError("covariance dimension does not match the observation stack");
        }
        const double ridge = 1e-8 * spec.realized.trace() / static_cast<double>(rows);
        columns_.resize(static_cast<std::size_t>(obs.cols));
        double total_variance = 0.0;
        for (Eigen::Index j = 0; j < obs.cols; ++j) {
            Column& col = columns_[static_cast<std::size_t>(j)];
            for (Eigen::Index i = 0; i < rows; ++i) {
                (obs.mask(i, j) != 0.0 ? col.observed : col.missing).push_back(i);
            }
            const Eigen::Index no = static_cast<Eigen::Index>(col.observed.size());
            const Eigen::Index nc = static_cast<Eigen::Index>(col.missing.size());
            complement_count_ += nc;
            if (no == 0 || nc == 0) {
                // Nothing to regress: an empty observed set predicts the prior
                // mean (zero); an empty complement predicts nothing.
                for (Eigen::Index i = 0; i < nc; ++i) {
                    total_variance += spec.realized(col.missing[static_cast<std::size_t>(i)],
                                                    col.missing[static_cast<std::size_t>(i)]);
                }
                continue;
            }
            Matrix sigma_oo(no, no);
            Matrix sigma_co(nc, no);
            for (Eigen::Index a = 0; a < no; ++a) {
                const Eigen::Index ia = col.observed[static_cast<std::size_t>(a)];
                for (Eigen::Index b = 0; b < no; ++b) {
                    sigma_oo(a, b) = spec.realized(ia, col.observed[static_cast<std::size_t>(b)]);
                }
            }
            for (Eigen::Index a = 0; a < nc; ++a) {
                const Eigen::Index ia = col.missing[static_cast<std::size_t>(a)];
                for (Eigen::Index b = 0; b < no; ++b) {
                    sigma_co(a, b) = spec.realized(ia, col.observed[static_cast<std::size_t>(b)]);
                }
            }
            sigma_oo.diagonal().array() += ridge;
            const Eigen::LDLT<Matrix> solver(sigma_oo);
            col.regression = solver.solve(sigma_co.transpose()).transpose();  // nc x no
            double cond_variance = 0.0;
            for (Eigen::Index a = 0; a < nc; ++a) {
                cond_variance += spec.realized(col.missing[static_cast<std::size_t>(a)],
                                               col.missing[static_cast<std::size_t>(a)]);
            }
            cond_variance -= col.regression.cwiseProduct(sigma_co).sum();
            total_variance += cond_variance;
        }
        mean_complement_variance_ =
            complement_count_ > 0 ? total_variance / static_cast<double>(complement_count_) : 0.0;
    }

    // Conditional mean of the unobserved entries given y on the observed
    // ones; zero at observed positions.
    Matrix apply(const Matrix& y) const {
        Matrix out = Matrix::Zero(y.rows(), y.cols());
        for (Eigen::Index j = 0; j < y.cols(); ++j) {
            const Column& col = columns_[static_cast<std::size_t>(j)];
            if (col.observed.empty() || col.missing.empty()) continue;
            Vector yo(static_cast<Eigen::Index>(col.observed.size()));
            for (std::size_t a = 0; a < col.observed.size(); ++a) {
                yo(static_cast<Eigen::Index>(a)) = y(col.observed[a], j);
            }
            const Vector predicted = col.regression * yo;
            for (std::size_t a = 0; a < col.missing.size(); ++a) {
                out(col.missing[a], j) = predicted(static_cast<Eigen::Index>(a));
            }
        }
        return out;
    }

    // Average conditional (posterior) variance per unobserved entry.
    double mean_complement_variance() const { return mean_complement_variance_; }
    Eigen::Index complement_count() const { return complement_count_; }

private:
    struct Column {
        std::vector<Eigen::Index> observed;
        std::vector<Eigen::Index> missing;
        Matrix regression;  // |missing| x |observed|
    };
    std::vector<Column> columns_;
    Eigen::Index complement_count_ = 0;
    double mean_complement_variance_ = 0.0;
};

}  // namespace detail

// Column-wise conditional Gaussian mean of the unobserved entries of y given
// its observed entries, under the prior N(0, spec.realized). Supported on the
// complement of the observed set; columns with no observations give zero.
inline Matrix lmmse_complete(const Matrix& y, const ObservationSet& omega,
                             const CovarianceSpec& spec) {
    if (y.rows() != omega.rows || y.cols() != omega.cols) {
        throw ShapeError("lmmse input does not match the observation shape");
    }
    return detail::LmmseOperator(spec, omega).apply(y);
}

// D_LMMSE: total conditional variance over the unobserved entries divided by
// their count.
inline double lmmse_error_per_entry(const CovarianceSpec& spec, const ObservationSet& omega) {
    const detail::LmmseOperator op(spec, omega);
    if (op.complement_count() == 0) {
        throw Error("empty-complement", "every entry is observed");
    }
    return op.mean_complement_variance();
}

inline RecoveryResult bsvt_recover(const ObservationSet& obs, const CovarianceSpec& spec,
                                   const BsvtParams& params,
                                   const IterationObserver& observer = {}) {
    if (obs.observed_count() < 1) {
        throw EmptyObservationError("bsvt requires at least one observed entry");
    }
    if (!(params.step > 0.0) || !(params.tolerance > 0.0) || params.max_iterations < 1) {
        throw InvalidParameterError("bsvt parameters out of range");
    }
    const Matrix& observed = obs.values;
    const double observed_norm = observed.norm();
    if (observed_norm == 0.0) {
        throw InvalidParameterError("observed entries are all zero");
    }
    const detail::LmmseOperator lmmse(spec, obs);
    const double d_lmmse = lmmse.mean_complement_variance();
    const double complement = static_cast<double>(lmmse.complement_count());
    const double entries = static_cast<double>(obs.rows * obs.cols);

    RecoveryResult result;
    Matrix y = Matrix::Zero(obs.rows, obs.cols);
    Matrix x;
    double tau = 0.0;
    SpectralDecomposition dec = svd(Matrix::Zero(obs.rows, obs.cols));
    for (int k = 1; k <= params.max_iterations; ++k) {
        Vector shrunk = (dec.singular_values.array() - tau).cwiseMax(0.0).matrix();
        x = dec.left_vectors * shrunk.asDiagonal() * dec.right_vectors.transpose();
        const double residual = (obs.project(x) - observed).norm() / observed_norm;
        result.residual_history.push_back(residual);
        result.threshold_history.push_back(tau);
        result.iterations = k;
        if (observer) observer(k, y, x);
        if (residual <= params.tolerance) {
            result.converged = true;
            break;
        }
        y += params.step * (observed - obs.project(x));
        const Matrix z = y + lmmse.apply(y);
        dec = svd(z);
        double sigma_sq = ((y - observed).squaredNorm() + complement * d_lmmse) / entries;
        if (sigma_sq < 1e-14) {
            sigma_sq = 1e-14;
            result.sigma_clamped = true;
        }
        tau = optimize_tau(dec, sigma_sq, params.degeneracy_tolerance);
    }
    result.estimate = std::move(x);
    return result;
}

}  // namespace jointmc
