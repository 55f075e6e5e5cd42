#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "fse/random.hpp"

namespace fse {

/// Additive constant of the Morris counter expectation,
/// mu = gamma/ln2 + 1/2 - sum_{i>=1} 1/(2^i - 1) ~ -0.2739.
/// The series tail after i terms is below 2^{1-i}.
inline double flajolet_mu(double tolerance = 1e-12) {
    if (!(tolerance > 0.0))
        throw std::invalid_argument("flajolet_mu: tolerance > 0 required");
    constexpr double kEulerGamma = 0.57721566490153286061;
    double series = 0.0;
    for (int i = 1; i <= 1100; ++i) {
        series += 1.0 / (std::exp2(static_cast<double>(i)) - 1.0);
        if (std::ldexp(1.0, 1 - i) < tolerance) break;
    }
    return kEulerGamma / std::numbers::ln2 + 0.5 - series;
}

namespace detail {

struct ConvPmf {
    std::vector<double> pmf; // pmf[t] = P(N = t)
    double deficit = 0.0;    // P(N > t_max), exact up to rounding
};

/// Exact pmf of N = sum of independent Geo(p_k) (each >= 1) on [0, t_max].
/// Summands are positive, so truncating every stage at t_max leaves the
/// probabilities on [0, t_max] exact; the lost mass is exactly P(N > t_max).
/// The deficit is accumulated stage by stage as the mass escaping past t_max
/// (a sum of positive terms), not as 1 - sum(pmf), whose cancellation noise
/// would swamp tails smaller than ~t_max ulps.
inline ConvPmf geometric_sum_pmf(const std::vector<double>& success_probs,
                                 std::size_t t_max) {
    ConvPmf out;
    out.pmf.assign(t_max + 1, 0.0);
    out.pmf[0] = 1.0;
    std::vector<double> next(t_max + 1);
    for (double r : success_probs) {
        if (!(r > 0.0) || r > 1.0)
            throw std::invalid_argument("geometric_sum_pmf: probs in (0,1]");
        // Mass escaping this stage: sum_s pmf[s] * P(Geo(r) > t_max - s)
        //                          = sum_s pmf[s] * (1-r)^(t_max-s), by Horner.
        double flux = out.pmf[0];
        for (std::size_t t = 1; t <= t_max; ++t)
            flux = flux * (1.0 - r) + out.pmf[t];
        out.deficit += flux;
        next[0] = 0.0;
        for (std::size_t t = 1; t <= t_max; ++t)
            next[t] = (1.0 - r) * next[t - 1] + r * out.pmf[t - 1];
        out.pmf.swap(next);
    }
    return out;
}

} // namespace detail

/// E[log2 N] for N = sum_{k=1}^{M-1} Geo(2^{-k}) by exact convolution.
/// Truncation: E[N | N > T] <= T + E[N], so the discarded contribution is at
/// most P(N > T) * log2(T + E[N]); T grows until that bound is inside
/// tolerance.  Tractable for M <= 12.
inline double eta_exact_small(int M, double tolerance = 1e-10) {
    if (M < 2) throw std::invalid_argument("eta_exact_small: M >= 2 required");
    if (M > 12) throw std::invalid_argument("eta_exact_small: M <= 12 required");
    if (!(tolerance > 0.0))
        throw std::invalid_argument("eta_exact_small: tolerance > 0 required");
    std::vector<double> probs;
    double mean = 0.0;
    for (int k = 1; k <= M - 1; ++k) {
        probs.push_back(std::ldexp(1.0, -k));
        mean += std::exp2(static_cast<double>(k));
    }
    std::size_t t_max = 64;
    while (4.0 * mean > static_cast<double>(t_max)) t_max *= 2;
    for (;;) {
        const auto conv = detail::geometric_sum_pmf(probs, t_max);
        const double tail_bound =
            conv.deficit * std::log2(static_cast<double>(t_max) + mean + 2.0);
        if (tail_bound < 0.5 * tolerance) {
            double e = 0.0;
            for (std::size_t t = t_max; t >= 1; --t)
                e += conv.pmf[t] * std::log2(static_cast<double>(t));
            return e;
        }
        if (t_max > (std::size_t{1} << 26))
            throw std::runtime_error("eta_exact_small: support too large");
        t_max *= 2;
    }
}

/// Monte Carlo estimate of E[log2 N], N = sum_{k=1}^{M-1} Geo(2^{-k}).
/// L = ((M+2)^2 + 1) / (alpha^2 delta) samples give an alpha-additive
/// estimate with probability >= 1-delta (Chebyshev via E[log^2 N] <= (M+2)^2,
/// with M standing in for the c*log2(n) + 2 state bound).
inline double eta_monte_carlo(int M, double alpha, double delta,
                              RandomSource& src) {
    if (M < 2) throw std::invalid_argument("eta_monte_carlo: M >= 2 required");
    if (!(alpha > 0.0)) throw std::invalid_argument("eta_monte_carlo: alpha > 0");
    if (!(delta > 0.0) || delta >= 1.0)
        throw std::invalid_argument("eta_monte_carlo: delta in (0,1)");
    const double m2 = static_cast<double>(M) + 2.0;
    const double ld = std::ceil((m2 * m2 + 1.0) / (alpha * alpha * delta));
    if (ld > 9.0e15) throw std::invalid_argument("eta_monte_carlo: L too large");
    const auto L = static_cast<std::uint64_t>(ld);
    double acc = 0.0;
    for (std::uint64_t i = 0; i < L; ++i) {
        unsigned __int128 n = 0;
        for (int k = 1; k <= M - 1; ++k)
            n += src.geometric_pow2(static_cast<unsigned>(k));
        acc += std::log2(static_cast<double>(n));
    }
    return acc / static_cast<double>(L);
}

enum class Variant { entropy, mutual_information };

inline const char* to_string(Variant v) noexcept {
    return v == Variant::entropy ? "entropy" : "mutual-information";
}

/// Derived constants shared by the estimation machines.
struct Calibration {
    Variant variant = Variant::entropy;
    std::int64_t n = 0;
    std::int64_t m2 = 0; // second alphabet size (MI variant only)
    double c = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    std::int64_t target = 0; // ceil(n^c), or ceil((n*m2)^c) for MI
    int B = 0;               // min k with target <= 2^k
    int M = 0;               // B + 1
    double mu = 0.0;
    double eta = 0.0;        // Monte Carlo estimate of E[log2 N]
    double a = 0.0;          // read-out offset
    std::int64_t s_bias = 0; // bias machine states
    double alpha_eta = 0.0;  // recorded eta Monte Carlo budget: additive error
    double delta_eta = 0.0;  // ... and failure probability
    std::uint64_t seed = 0;
};

namespace detail {

/// ceil(base^c) with integer-result snapping so exact powers (e.g. 1024^1.5)
/// do not round up a ulp into the next integer.
inline std::int64_t ceil_power(std::int64_t base, double c) {
    const long double v =
        std::pow(static_cast<long double>(base), static_cast<long double>(c));
    if (!(v < 4.0e18L)) throw std::invalid_argument("ceil_power: n^c overflows");
    const long double r = std::round(v);
    const long double snapped =
        (std::abs(v - r) <= 1e-9L * std::max(1.0L, r)) ? r : std::ceil(v);
    return static_cast<std::int64_t>(snapped);
}

inline void check_params(std::int64_t n, double c, double beta, double delta) {
    if (n < 2) throw std::invalid_argument("calibrate: n >= 2 required");
    if (!(c > 1.0)) throw std::invalid_argument("calibrate: c > 1 required");
    if (!(beta > 0.0)) throw std::invalid_argument("calibrate: beta > 0 required");
    if (!(delta > 0.0) || delta >= 1.0)
        throw std::invalid_argument("calibrate: delta in (0,1) required");
}

inline std::int64_t states_from(double numerator, double beta, double delta) {
    const double raw = std::ceil(numerator / (beta * beta * delta)) + 1.0;
    if (raw > 4.0e18) throw std::invalid_argument("calibrate: s_bias overflows");
    return static_cast<std::int64_t>(raw);
}

} // namespace detail

inline Calibration calibrate(std::int64_t n, double c, double beta, double delta,
                             RandomSource& src) {
    detail::check_params(n, c, beta, delta);
    Calibration cal;
    cal.variant = Variant::entropy;
    cal.n = n;
    cal.c = c;
    cal.beta = beta;
    cal.delta = delta;
    cal.target = detail::ceil_power(n, c);
    cal.B = std::bit_width(static_cast<std::uint64_t>(cal.target - 1));
    cal.M = cal.B + 1;
    cal.mu = flajolet_mu();
    cal.alpha_eta = beta / 10.0;
    cal.delta_eta = delta / 10.0;
    cal.eta = eta_monte_carlo(cal.M, cal.alpha_eta, cal.delta_eta, src);
    cal.a = 1.0 - (cal.mu + cal.eta) / (2.0 * cal.M);
    cal.s_bias = detail::states_from(4.0 * cal.M * cal.M, beta, delta);
    return cal;
}

inline Calibration calibrate_mi(std::int64_t n, std::int64_t m2, double c,
                                double beta, double delta, RandomSource& src) {
    detail::check_params(n, c, beta, delta);
    if (m2 < 2) throw std::invalid_argument("calibrate_mi: m2 >= 2 required");
    if (n > (std::int64_t{1} << 31) || m2 > (std::int64_t{1} << 31))
        throw std::invalid_argument("calibrate_mi: alphabet too large");
    Calibration cal;
    cal.variant = Variant::mutual_information;
    cal.n = n;
    cal.m2 = m2;
    cal.c = c;
    cal.beta = beta;
    cal.delta = delta;
    cal.target = detail::ceil_power(n * m2, c);
    cal.B = std::bit_width(static_cast<std::uint64_t>(cal.target - 1));
    cal.M = cal.B + 1;
    cal.mu = flajolet_mu();
    cal.alpha_eta = beta / 10.0;
    cal.delta_eta = delta / 10.0;
    cal.eta = eta_monte_carlo(cal.M, cal.alpha_eta, cal.delta_eta, src);
    cal.a = 2.0 / 3.0 - (cal.mu + cal.eta) / (6.0 * cal.M);
    cal.s_bias = detail::states_from(36.0 * cal.M * cal.M, beta, delta);
    return cal;
}

inline Calibration calibrate(std::int64_t n, double c, double beta, double delta,
                             std::uint64_t seed) {
    RandomSource src(seed, 0);
    Calibration cal = calibrate(n, c, beta, delta, src);
    cal.seed = seed;
    return cal;
}

inline Calibration calibrate_mi(std::int64_t n, std::int64_t m2, double c,
                                double beta, double delta, std::uint64_t seed) {
    RandomSource src(seed, 0);
    Calibration cal = calibrate_mi(n, m2, c, beta, delta, src);
    cal.seed = seed;
    return cal;
}

} // namespace fse
