#pragma once

// Acquisition pipeline: corrupt each dataset with AWGN, draw a uniform
// observation mask per dataset, project onto the observed entries, and stack
// the two datasets into one 2M x N observation matrix.

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "jointmc/covariance.hpp"
#include "jointmc/errors.hpp"
#include "jointmc/matrix_ops.hpp"
#include "jointmc/rng.hpp"

namespace jointmc {

using IndexSet = std::vector<std::pair<int, int>>;  // (row, col), stacked coordinates

struct ObservationSet {
    Eigen::Index rows = 0;  // 2M
    Eigen::Index cols = 0;  // N
    IndexSet omega1;        // rows in [0, M)
    IndexSet omega2;        // rows in [M, 2M)
    Matrix values;          // P_Omega(R): observed noisy entries, zeros elsewhere
    Matrix mask;            // 1.0 on Omega, 0.0 elsewhere
    double noise_sigma1 = 0.0;
    double noise_sigma2 = 0.0;

    Eigen::Index observed_count() const {
        return static_cast<Eigen::Index>(omega1.size() + omega2.size());
    }
    Eigen::Index complement_count() const { return rows * cols - observed_count(); }

    // P_Omega: zero out everything off the observed set.
    Matrix project(const Matrix& m) const { return m.cwiseProduct(mask); }
};

// sigma such that 10*log10((Tr(Sigma_ll)/M) / sigma^2) = snr_db. The blocks
// have unit diagonal, so this reduces to 10^(-snr_db/20); an infinite SNR
// maps to sigma = 0.
inline double snr_to_sigma(const ToeplitzBlockSpec& block, double snr_db) {
    const double mean_power = block.matrix.trace() / block.size;
    return std::sqrt(mean_power * std::pow(10.0, -snr_db / 10.0));
}

// Adds i.i.d. N(0, sigma^2) to every entry, addressed by (seed, row, col).
inline Matrix add_noise(const Matrix& matrix, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0)) {
        throw InvalidParameterError("noise sigma must be nonnegative");
    }
    if (sigma == 0.0) return matrix;
    Matrix out = matrix;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            out(i, j) += sigma * normal_at(seed, i, j);
        }
    }
    return out;
}

// k distinct cells of a rows x cols grid, uniform without replacement
// (partial Fisher-Yates over row-major linear indices), sorted (row, col).
inline IndexSet sample_mask(int rows, int cols, long long k, std::uint64_t seed) {
    const long long total = static_cast<long long>(rows) * cols;
    if (k < 0 || k > total) {
        throw InvalidParameterError("mask size " + std::to_string(k) + " outside [0, " +
                                    std::to_string(total) + "]");
    }
    std::vector<long long> cells(static_cast<std::size_t>(total));
    for (long long i = 0; i < total; ++i) cells[static_cast<std::size_t>(i)] = i;
    SplitMix64 rng(seed);
    IndexSet picked;
    picked.reserve(static_cast<std::size_t>(k));
    for (long long i = 0; i < k; ++i) {
        const long long j =
            i + static_cast<long long>(rng.next_below(static_cast<std::uint64_t>(total - i)));
        std::swap(cells[static_cast<std::size_t>(i)], cells[static_cast<std::size_t>(j)]);
        const long long cell = cells[static_cast<std::size_t>(i)];
        picked.emplace_back(static_cast<int>(cell / cols), static_cast<int>(cell % cols));
    }
    std::sort(picked.begin(), picked.end());
    return picked;
}

struct AcquisitionSeeds {
    std::uint64_t noise1;
    std::uint64_t noise2;
    std::uint64_t mask1;
    std::uint64_t mask2;
};

// Splits one experiment seed into the four independent sub-streams used by
// acquire(), via derive_seed(seed, 1..4).
inline AcquisitionSeeds split_acquisition_seed(std::uint64_t seed) {
    return {derive_seed(seed, 1), derive_seed(seed, 2), derive_seed(seed, 3),
            derive_seed(seed, 4)};
}

// Full acquisition: noise on all entries of each dataset (observed or not),
// masks drawn independently per dataset, observations stacked with dataset-2
// rows offset by M.
inline ObservationSet acquire(const DatasetPair& pair, long long k1, long long k2,
                              double sigma1, double sigma2, std::uint64_t seed) {
    const int m = static_cast<int>(pair.m1.rows());
    const int n = static_cast<int>(pair.m1.cols());
    const AcquisitionSeeds seeds = split_acquisition_seed(seed);
    const Matrix r1 = add_noise(pair.m1, sigma1, seeds.noise1);
    const Matrix r2 = add_noise(pair.m2, sigma2, seeds.noise2);

    ObservationSet obs;
    obs.rows = 2 * m;
    obs.cols = n;
    obs.noise_sigma1 = sigma1;
    obs.noise_sigma2 = sigma2;
    obs.values = Matrix::Zero(2 * m, n);
    obs.mask = Matrix::Zero(2 * m, n);
    obs.omega1 = sample_mask(m, n, k1, seeds.mask1);
    for (const auto& [row, col] : obs.omega1) {
        obs.values(row, col) = r1(row, col);
        obs.mask(row, col) = 1.0;
    }
    IndexSet omega2 = sample_mask(m, n, k2, seeds.mask2);
    obs.omega2.reserve(omega2.size());
    for (const auto& [row, col] : omega2) {
        obs.omega2.emplace_back(row + m, col);
        obs.values(row + m, col) = r2(row, col);
        obs.mask(row + m, col) = 1.0;
    }
    return obs;
}

}  // namespace jointmc
