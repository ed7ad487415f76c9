#pragma once

// Deterministic randomness for the whole library.
//
// Every stochastic operation draws from SplitMix64, a 64-bit generator whose
// update rule is fixed integer arithmetic, and converts uniforms to normal
// variates with Acklam's rational approximation of the inverse normal CDF
// (relative error below 1.2e-9). Given the same seed, all platforms produce
// bit-identical streams at the same library version.
//
// Gaussian matrix entries are addressed by (seed, row, column) rather than by
// draw order, so two matrices sampled under the same seed agree on every cell
// they share regardless of shape. Sampling rows 0..M-1 of a seed therefore
// yields exactly the top half of a 2M-row sample under that seed.

#include <cstdint>
#include <cmath>

namespace jointmc {

inline constexpr std::uint64_t kSeedGolden = 0x9E3779B97F4A7C15ULL;

// Bijective finalizer stage of SplitMix64.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Documented sub-seed hash: combines a tag into a seed and mixes. Chained
// calls derive independent streams, e.g. derive_seed(derive_seed(s, a), b).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept {
    return splitmix64_mix(seed ^ (tag + kSeedGolden + (seed << 6) + (seed >> 2)));
}

// Inverse of the standard normal CDF, Acklam's rational approximation.
// Max relative error ~1.15e-9 over (0, 1); uses only sqrt/log so the result
// is reproducible across conforming platforms.
inline double inverse_normal_cdf(double p) noexcept {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                    2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Sequential SplitMix64 stream.
class SplitMix64 {
public:
    explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

    constexpr std::uint64_t next() noexcept {
        state_ += kSeedGolden;
        return splitmix64_mix(state_);
    }

    // Uniform integer in [0, bound), bound >= 1; Lemire multiply-shift.
    std::uint64_t next_below(std::uint64_t bound) noexcept {
        const auto wide = static_cast<unsigned __int128>(next()) * bound;
        return static_cast<std::uint64_t>(wide >> 64);
    }

    // Uniform double in the open interval (0, 1).
    double next_unit() noexcept {
        return static_cast<double>(next() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    double next_normal() noexcept { return inverse_normal_cdf(next_unit()); }

private:
    std::uint64_t state_;
};

// Standard normal variate addressed by (seed, row, col).
inline double normal_at(std::uint64_t seed, std::int64_t row, std::int64_t col) noexcept {
    const std::uint64_t h =
        derive_seed(derive_seed(seed, static_cast<std::uint64_t>(row)),
                    static_cast<std::uint64_t>(col));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53 + 0x1.0p-54;
    return inverse_normal_cdf(u);
}

}  // namespace jointmc
