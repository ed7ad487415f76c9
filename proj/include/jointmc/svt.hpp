#pragma once

// Singular Value Thresholding recovery of a stacked matrix from its observed
// entries. Starting from Y = 0, each iteration shrinks the singular values of
// Y by a fixed threshold tau to form the estimate X, then takes a gradient
// step on the observed residual:
//   X_k = D_tau(Y_{k-1}),  Y_k = Y_{k-1} + step * (P_Omega(R) - P_Omega(X_k)).

#include <functional>
#include <string>
#include <vector>

#include "jointmc/acquisition.hpp"
#include "jointmc/errors.hpp"
#include "jointmc/matrix_ops.hpp"

namespace jointmc {

struct SvtParams {
    double tau = 0.0;            // threshold; the classical choice is 5 * N
    double step = 1.0;           // in (0, 2)
    double tolerance = 1e-4;     // relative observed-residual stopping rule
    int max_iterations = 500;
};

// Classical step-size heuristic 1.2 / sampling_fraction, clamped into the
// admissible interval (0, 2).
inline double default_step(double sampling_fraction) {
    if (!(sampling_fraction > 0.0 && sampling_fraction <= 1.0)) {
        throw InvalidParameterError("sampling fraction must lie in (0, 1]");
    }
    return std::min(1.2 / sampling_fraction, 1.99);
}

inline SvtParams default_svt_params(Eigen::Index n_cols, double sampling_fraction) {
    SvtParams params;
    params.tau = 5.0 * static_cast<double>(n_cols);
    params.step = default_step(sampling_fraction);
    return params;
}

struct RecoveryResult {
    Matrix estimate;
    int iterations = 0;
    bool converged = false;
    std::vector<double> residual_history;   // ||P(X_k) - P(R)||_F / ||P(R)||_F
    std::vector<double> threshold_history;  // tau applied at each iteration
    bool sigma_clamped = false;              // BSVT only: noise estimate hit the floor
};

// Observer invoked once per iteration with (k, Y_{k-1}, X_k); used by tests
// to check per-iterate invariants.
using IterationObserver = std::function<void(int, const Matrix&, const Matrix&)>;

inline RecoveryResult svt_recover(const ObservationSet& obs, const SvtParams& params,
                                  const IterationObserver& observer = {}) {
    if (obs.observed_count() < 1) {
        throw EmptyObservationError("svt requires at least one observed entry");
    }
    if (!(params.step > 0.0 && params.step < 2.0)) {
        throw InvalidParameterError("step size must lie in (0, 2)");
    }
    if (!(params.tau > 0.0) || !(params.tolerance > 0.0) || params.max_iterations < 1) {
        throw InvalidParameterError("svt parameters out of range");
    }
    const Matrix& observed = obs.values;
    const double observed_norm = observed.norm();
    if (observed_norm == 0.0) {
        throw InvalidParameterError("observed entries are all zero");
    }

    RecoveryResult result;
    Matrix y = Matrix::Zero(obs.rows, obs.cols);
    Matrix x;
    for (int k = 1; k <= params.max_iterations; ++k) {
        x = soft_threshold(y, params.tau);
        const double residual = (obs.project(x) - observed).norm() / observed_norm;
        result.residual_history.push_back(residual);
        result.threshold_history.push_back(params.tau);
        result.iterations = k;
        if (observer) observer(k, y, x);
        if (residual <= params.tolerance) {
            result.converged = true;
            break;
        }
        y += params.step * (observed - obs.project(x));
    }
    result.estimate = std::move(x);
    return result;
}

}  // namespace jointmc
