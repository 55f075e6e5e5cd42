#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace fse::stats {

struct Interval {
    double lower = 0.0;
    double upper = 1.0;
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials,
                                double z = 1.959963984540054) {
    if (trials == 0) throw std::invalid_argument("wilson_interval: no trials");
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = phat + z2 / (2.0 * n);
    const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
    // the endpoints are exact at the degenerate proportions
    return {successes == 0 ? 0.0 : std::max(0.0, (center - half) / denom),
            successes == trials ? 1.0 : std::min(1.0, (center + half) / denom)};
}

/// Upper tail of the chi-square distribution with df degrees of freedom.
inline double chi_square_sf(double stat, double df) {
    if (df <= 0.0) throw std::invalid_argument("chi_square_sf: df <= 0");
    if (stat <= 0.0) return 1.0;
    return boost::math::gamma_q(df / 2.0, stat / 2.0);
}

namespace detail {

// Merges trailing low-expectation bins so every cell has expected count
// >= min_expected; keeps bin order otherwise.  Returns (observed, expected).
inline std::pair<std::vector<double>, std::vector<double>>
merge_bins(const std::vector<double>& observed, const std::vector<double>& expected,
           double min_expected) {
    std::vector<double> obs, exp;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        o_acc += observed[i];
        e_acc += expected[i];
        if (e_acc >= min_expected) {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (!obs.empty()) {
            obs.back() += o_acc;
            exp.back() += e_acc;
        } else {
            obs.push_back(o_acc);
            exp.push_back(e_acc);
        }
    }
    return {std::move(obs), std::move(exp)};
}

} // namespace detail

struct ChiSquareResult {
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

/// Pearson goodness-of-fit of observed counts against cell probabilities.
/// Cells with small expected counts are merged (threshold 5).
inline ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& counts,
                                      const std::vector<double>& probs,
                                      double min_expected = 5.0) {
    if (counts.size() != probs.size())
        throw std::invalid_argument("chi_square_gof: size mismatch");
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    std::vector<double> obs(counts.begin(), counts.end());
    std::vector<double> exp(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) exp[i] = probs[i] * total;
    auto [o, e] = detail::merge_bins(obs, exp, min_expected);
    if (o.size() < 2) return {0.0, 1.0, 1.0};
    double stat = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) {
        const double d = o[i] - e[i];
        if (e[i] > 0.0) stat += d * d / e[i];
    }
    const double df = static_cast<double>(o.size() - 1);
    return {stat, df, chi_square_sf(stat, df)};
}

/// Two-sample chi-square homogeneity test on matched count vectors.
inline ChiSquareResult chi_square_two_sample(const std::vector<std::uint64_t>& a,
                                             const std::vector<std::uint64_t>& b,
                                             double min_expected = 5.0) {
    if (a.size() != b.size())
        throw std::invalid_argument("chi_square_two_sample: size mismatch");
    double na = 0.0, nb = 0.0;
    for (auto c : a) na += static_cast<double>(c);
    for (auto c : b) nb += static_cast<double>(c);
    if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("chi_square_two_sample: empty sample");
    // Merge on pooled counts so both samples share bin boundaries.
    std::vector<double> pooled_a, pooled_b;
    double aa = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        aa += static_cast<double>(a[i]);
        bb += static_cast<double>(b[i]);
        if (aa + bb >= 2.0 * min_expected) {
            pooled_a.push_back(aa);
            pooled_b.push_back(bb);
            aa = bb = 0.0;
        }
    }
    if (aa + bb > 0.0) {
        if (!pooled_a.empty()) {
            pooled_a.back() += aa;
            pooled_b.back() += bb;
        } else {
            pooled_a.push_back(aa);
            pooled_b.push_back(bb);
        }
    }
    if (pooled_a.size() < 2) return {0.0, 1.0, 1.0};
    const double ka = std::sqrt(nb / na);
    const double kb = std::sqrt(na / nb);
    double stat = 0.0;
    for (std::size_t i = 0; i < pooled_a.size(); ++i) {
        const double d = ka * pooled_a[i] - kb * pooled_b[i];
        const double tot = pooled_a[i] + pooled_b[i];
        if (tot > 0.0) stat += d * d / tot;
    }
    const double df = static_cast<double>(pooled_a.size() - 1);
    return {stat, df, chi_square_sf(stat, df)};
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    std::uint64_t count = 0;
};

/// Streaming mean/variance accumulator (Welford).
class RunningMoments {
public:
    void add(double x) noexcept {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    Moments snapshot() const noexcept {
        return {mean_, n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0, n_};
    }

private:
    double mean_ = 0.0;
    double m2_ = 0.0;
    std::uint64_t n_ = 0;
};

} // namespace fse::stats
