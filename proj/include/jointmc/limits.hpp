#pragma once

// Fundamental-limit calculator for joint recovery of two stacked M x N
// datasets: rank bounds for the stack, per-dataset and joint observation
// thresholds, classification of a (k1, k2) point into recovery regions, and
// the necessary/sufficient conditions under which joint recovery needs fewer
// observations than independent recovery.

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "jointmc/errors.hpp"

namespace jointmc {

struct ProblemDims {
    int m = 0;   // rows per dataset
    int n = 0;   // columns
    int r1 = 0;  // rank of dataset 1
    int r2 = 0;  // rank of dataset 2
    int r = 0;   // rank of the stack

    void validate() const {
        if (m < 1 || n < 1) throw InvalidParameterError("dims must be positive");
        const int cap = std::min(m, n);
        if (r1 < 1 || r1 > cap || r2 < 1 || r2 > cap) {
            throw InvalidParameterError("individual ranks must lie in [1, min(m, n)]");
        }
        if (r < std::max(r1, r2) || r > std::min(r1 + r2, std::min(2 * m, n))) {
            throw InvalidParameterError("stack rank violates the rank bounds");
        }
    }
};

// max(r1, r2) <= rank(stack) <= r1 + r2.
inline std::pair<int, int> rank_bounds(int r1, int r2) {
    if (r1 < 0 || r2 < 0) throw InvalidParameterError("ranks must be nonnegative");
    return {std::max(r1, r2), r1 + r2};
}

// Strict lower bound on observations for independent recovery of one M x N
// matrix of the given rank: feasible iff k > (m + n - rank) * rank.
inline long long independent_threshold(int m, int n, int rank) {
    if (rank < 1 || rank > std::min(m, n)) {
        throw InvalidParameterError("rank outside [1, min(m, n)]");
    }
    return static_cast<long long>(m + n - rank) * rank;
}

// Strict lower bound for the stacked 2M x N matrix: feasible iff
// k1 + k2 > (2m + n - r) * r.
inline long long joint_threshold(int m, int n, int r) {
    if (r < 1 || r > std::min(2 * m, n)) {
        throw InvalidParameterError("rank outside [1, min(2m, n)]");
    }
    return static_cast<long long>(2 * m + n - r) * r;
}

struct RegionReport {
    long long t1 = 0;
    long long t2 = 0;
    long long tj = 0;
    bool independent1_feasible = false;  // k1 > t1
    bool independent2_feasible = false;  // k2 > t2
    bool joint_feasible = false;         // k1 + k2 > tj
    std::string region_label;
};

// Maps the boolean triple to a label. R4 = all three feasible (the
// independent-recovery area); R7 = joint-only (neither dataset recoverable
// alone). The remaining six triples get stable internal labels; swapping the
// datasets maps (a, b, c) -> (b, a, c), i.e. R-B <-> R-C and R-E <-> R-F.
// The triple itself is the authoritative output.
inline RegionReport classify_region(long long k1, long long k2, const ProblemDims& dims) {
    dims.validate();
    if (k1 < 0 || k2 < 0) throw InvalidParameterError("observation counts must be >= 0");
    RegionReport report;
    report.t1 = independent_threshold(dims.m, dims.n, dims.r1);
    report.t2 = independent_threshold(dims.m, dims.n, dims.r2);
    report.tj = joint_threshold(dims.m, dims.n, dims.r);
    report.independent1_feasible = k1 > report.t1;
    report.independent2_feasible = k2 > report.t2;
    report.joint_feasible = k1 + k2 > report.tj;
    const int code = (report.independent1_feasible ? 4 : 0) |
                     (report.independent2_feasible ? 2 : 0) |
                     (report.joint_feasible ? 1 : 0);
    switch (code) {
        case 0b111: report.region_label = "R4"; break;
        case 0b001: report.region_label = "R7"; break;
        case 0b000: report.region_label = "R-A"; break;
        case 0b100: report.region_label = "R-B"; break;
        case 0b010: report.region_label = "R-C"; break;
        case 0b110: report.region_label = "R-D"; break;
        case 0b101: report.region_label = "R-E"; break;
        default:    report.region_label = "R-F"; break;  // 0b011
    }
    return report;
}

// Necessary condition for joint recovery to be beneficial:
// 1 - max(r1,r2)/min(r1,r2) > (min(r1,r2) - n)/m, evaluated exactly in
// integers after clearing the (positive) denominators m and min(r1,r2).
inline bool beneficial_necessary(const ProblemDims& dims) {
    dims.validate();
    const long long lo = std::min(dims.r1, dims.r2);
    const long long hi = std::max(dims.r1, dims.r2);
    return dims.m * (lo - hi) > lo * (lo - dims.n);
}

// Smaller root of r^2 - (2m + n) r + (t1 + t2) = 0; joint recovery is
// beneficial for stack ranks strictly below this value. Used directly and as
// the fallback for the closed form when its denominator vanishes.
inline double beneficial_rank_bound_quadratic(const ProblemDims& dims) {
    dims.validate();
    const double sum = static_cast<double>(independent_threshold(dims.m, dims.n, dims.r1) +
                                           independent_threshold(dims.m, dims.n, dims.r2));
    const double b = 2.0 * dims.m + dims.n;
    return 0.5 * (b - std::sqrt(b * b - 4.0 * sum));
}

// Closed-form upper bound on the stack rank below which joint recovery needs
// fewer observations than independent recovery:
//   m + n/2 - (1/2)(m+n-2r1-2r2) * sqrt(1 + (3m^2+2mn-8r1r2)/(m+n-2r1-2r2)^2).
// Falls back to the quadratic-root form when the denominator vanishes.
inline double beneficial_rank_bound(const ProblemDims& dims) {
    dims.validate();
    const long long denom = static_cast<long long>(dims.m) + dims.n - 2 * dims.r1 - 2 * dims.r2;
    if (denom == 0) return beneficial_rank_bound_quadratic(dims);
    const double d = static_cast<double>(denom);
    const double num = 3.0 * dims.m * dims.m + 2.0 * static_cast<double>(dims.m) * dims.n -
                       8.0 * static_cast<double>(dims.r1) * dims.r2;
    return dims.m + 0.5 * dims.n - 0.5 * d * std::sqrt(1.0 + num / (d * d));
}

// Joint-only region is nonempty iff integer (k1, k2) exist with k1 <= t1,
// k2 <= t2 and k1 + k2 > tj, i.e. iff t1 + t2 > tj.
inline bool r7_nonempty(const ProblemDims& dims) {
    dims.validate();
    return independent_threshold(dims.m, dims.n, dims.r1) +
               independent_threshold(dims.m, dims.n, dims.r2) >
           joint_threshold(dims.m, dims.n, dims.r);
}

}  // namespace jointmc
