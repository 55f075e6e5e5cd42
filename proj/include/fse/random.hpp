#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace fse {

namespace detail {

// SplitMix64 finalizer; full-avalanche 64-bit mixer.
inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Derives an odd additive constant with enough bit transitions to keep the
// Weyl sequence well mixed (the "gamma" construction from splittable PRNGs).
inline constexpr std::uint64_t mix_gamma(std::uint64_t z) noexcept {
    z = mix64(z) | 1ULL;
    if (std::popcount(z ^ (z >> 1)) < 24) z ^= 0xaaaaaaaaaaaaaaaaULL;
    return z;
}

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

} // namespace detail

/// Deterministic splittable random source.
///
/// A (seed, stream) pair selects one of 2^128 nominal streams; each stream is
/// a Weyl sequence with a per-stream odd increment pushed through a 64-bit
/// finalizer.  Construction is O(1), so trial i of a simulation can own
/// RandomSource(seed, i) without coordination.  Copying the object snapshots
/// the stream position; replaying a copy reproduces the tail bit for bit.
class RandomSource {
public:
    RandomSource() : RandomSource(0, 0) {}

    RandomSource(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {
        const std::uint64_t h =
            detail::mix64(seed + detail::kGolden) ^
            detail::mix64(stream * 0xc2b2ae3d27d4eb4fULL + 0x165667b19e3779f9ULL);
        state_ = detail::mix64(h + detail::kGolden);
        gamma_ = detail::mix_gamma(h);
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

    std::uint64_t next_u64() noexcept {
        state_ += gamma_;
        return detail::mix64(state_);
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double next_double() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in (0, 1]; safe as a log() argument.
    double next_double_nonzero() noexcept {
        return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
    }

    /// Bernoulli(p), exact for every representable p in [0, 1].
    ///
    /// Compares the bit stream against the binary expansion of p, 64 bits per
    /// round.  Every double is a dyadic rational, so the walk terminates; the
    /// expected number of words consumed is 1 + 2^-64.
    bool bernoulli(double p) {
        if (!(p >= 0.0) || p > 1.0)
            throw std::invalid_argument("bernoulli: p in [0,1] required");
        if (p == 0.0) return false;
        if (p == 1.0) return true;
        double rest = p; // strictly inside (0,1) from here on
        for (;;) {
            const double scaled = rest * 0x1.0p64; // exact: power-of-two scaling
            std::uint64_t threshold;
            double tail;
            if (scaled >= 0x1.0p53) {
                // scaled already integral: the 53-bit mantissa carries no
                // fractional part at this magnitude.
                threshold = static_cast<std::uint64_t>(scaled);
                tail = 0.0;
            } else {
                const double top = std::floor(scaled);
                threshold = static_cast<std::uint64_t>(top);
                tail = scaled - top; // exact: fractional part fits the mantissa
            }
            const std::uint64_t u = next_u64();
            if (u < threshold) return true;
            if (u > threshold) return false;
            if (tail == 0.0) return false; // expansion exhausted
            rest = tail;                   // tie (probability 2^-64): keep comparing
        }
    }

    /// Bernoulli(2^-s), exact, via direct bit comparison.
    bool bernoulli_pow2(unsigned s) {
        if (s == 0) return true;
        while (s > 64) {
            if (next_u64() != 0) return false;
            s -= 64;
        }
        return next_u64() < (std::uint64_t{1} << (64 - s));
    }

    /// Geometric(p) on {1, 2, ...}: trials up to and including first success.
    /// Inverse-CDF on a 53-bit uniform; resolution 2^-53.
    std::uint64_t geometric(double p) {
        if (!(p > 0.0) || p > 1.0)
            throw std::invalid_argument("geometric: p must be in (0, 1]");
        if (p == 1.0) return 1;
        const double u = next_double_nonzero();
        const double g = std::floor(std::log(u) / std::log1p(-p));
        if (!(g > 0.0)) return 1;
        if (g >= 0x1.0p62) return std::uint64_t{1} << 62;
        return 1 + static_cast<std::uint64_t>(g);
    }

    /// Geometric(2^-s).  The s = 1 case scans for the first set bit and is
    /// exact; other s delegate to the inverse-CDF path.
    std::uint64_t geometric_pow2(unsigned s) {
        if (s == 0) return 1;
        if (s == 1) {
            std::uint64_t base = 0;
            for (;;) {
                const std::uint64_t u = next_u64();
                if (u != 0)
                    return base + static_cast<unsigned>(std::countl_zero(u)) + 1;
                base += 64;
            }
        }
        if (s >= 1024) return std::uint64_t{1} << 62; // beyond any sane caller
        return geometric(std::ldexp(1.0, -static_cast<int>(s)));
    }

    // UniformRandomBitGenerator interface.
    using result_type = std::uint64_t;
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~std::uint64_t{0}; }
    result_type operator()() noexcept { return next_u64(); }

    friend bool operator==(const RandomSource& a, const RandomSource& b) noexcept {
        return a.state_ == b.state_ && a.gamma_ == b.gamma_;
    }

private:
    std::uint64_t state_ = 0;
    std::uint64_t gamma_ = 0;
    std::uint64_t seed_ = 0;
    std::uint64_t stream_ = 0;
};

/// Independent stream derived from (seed, stream_id); O(1), no coordination.
inline RandomSource split(std::uint64_t seed, std::uint64_t stream_id) {
    return RandomSource(seed, stream_id);
}

namespace detail {

// stirlerr(k) = ln k! - ln sqrt(2 pi k) (k/e)^k, tabulated for k < 10.
inline double stirling_tail(double k) noexcept {
    static constexpr double kTail[] = {
        0.0810614667953272,  0.0413406959554092,  0.0276779256849983,
        0.02079067210376509, 0.0166446911898211,  0.0138761288230707,
        0.0118967099458917,  0.0104112652619720,  0.00925546218271273,
        0.00833056343336287};
    if (k <= 9.0) return kTail[static_cast<int>(k)];
    const double kp1 = k + 1.0;
    const double kp1sq = kp1 * kp1;
    return (1.0 / 12 - (1.0 / 360 - 1.0 / 1260 / kp1sq) / kp1sq) / kp1;
}

// Sequential CDF inversion; exact, O(t*p) expected, requires t*p modest.
inline std::uint64_t binomial_inversion(RandomSource& src, std::uint64_t t, double p) {
    const double q = 1.0 - p;
    const double s = p / q;
    const double tq = static_cast<double>(t);
    const double bound = std::min(tq, tq * p + 12.0 * std::sqrt(tq * p * q + 1.0));
    for (;;) {
        double px = std::exp(tq * std::log(q)); // q^t, no underflow while t*p <= ~30
        double u = src.next_double();
        double k = 0.0;
        while (u > px) {
            k += 1.0;
            if (k > bound) break; // numeric tail exhausted: redraw
            u -= px;
            px *= (tq - k + 1.0) * s / k;
        }
        if (k <= bound) return static_cast<std::uint64_t>(k);
    }
}

// Transformed rejection with squeeze (Hormann's BTRS); exact for t*p >= 10,
// p <= 1/2.  Expected uniforms per draw ~ 2.6.
inline std::uint64_t binomial_btrs(RandomSource& src, std::uint64_t t, double p) {
    const double n = static_cast<double>(t);
    const double q = 1.0 - p;
    const double spq = std::sqrt(n * p * q);
    const double b = 1.15 + 2.53 * spq;
    const double a = -0.0873 + 0.0248 * b + 0.01 * p;
    const double c = n * p + 0.5;
    const double v_r = 0.92 - 4.2 / b;
    const double r = p / q;
    const double alpha = (2.83 + 5.1 / b) * spq;
    const double m = std::floor((n + 1.0) * p);
    for (;;) {
        const double u = src.next_double() - 0.5;
        double v = src.next_double_nonzero();
        const double us = 0.5 - std::abs(u);
        const double k = std::floor((2.0 * a / us + b) * u + c);
        if (us >= 0.07 && v <= v_r) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || k > n) continue;
        v = std::log(v * alpha / (a / (us * us) + b));
        const double accept =
            (m + 0.5) * std::log((m + 1.0) / (r * (n - m + 1.0))) +
            (n + 1.0) * std::log((n - m + 1.0) / (n - k + 1.0)) +
            (k + 0.5) * std::log(r * (n - k + 1.0) / (k + 1.0)) +
            stirling_tail(m) + stirling_tail(n - m) -
            stirling_tail(k) - stirling_tail(n - k);
        if (v <= accept) return static_cast<std::uint64_t>(k);
    }
}

} // namespace detail

/// Binomial(t, p) draw, exact in distribution for all valid (t, p).
inline std::uint64_t binomial(RandomSource& src, std::uint64_t t, double p) {
    if (std::isnan(p) || p < 0.0 || p > 1.0)
        throw std::invalid_argument("binomial: p must be in [0, 1]");
    if (t == 0 || p == 0.0) return 0;
    if (p == 1.0) return t;
    if (p > 0.5) return t - binomial(src, t, 1.0 - p);
    const double mean = static_cast<double>(t) * p;
    if (mean < 10.0) return detail::binomial_inversion(src, t, p);
    return detail::binomial_btrs(src, t, p);
}

} // namespace fse
