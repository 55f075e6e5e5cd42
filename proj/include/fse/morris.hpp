#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "fse/random.hpp"

namespace fse {

/// Logarithmic counter over states {1, 2, ...}: an increment advances the
/// state with probability 2^-state, so after m increments the state tracks
/// log2 m using O(log log m) bits.  cap == 0 means unbounded; a capped
/// counter refuses increments once state == cap.
struct MorrisCounter {
    int state = 1;
    int cap = 0;

    bool at_cap() const noexcept { return cap > 0 && state >= cap; }
};

inline MorrisCounter morris_counter(int cap = 0) {
    if (cap < 0 || cap == 1)
        throw std::invalid_argument("morris_counter: cap must be 0 or >= 2");
    return MorrisCounter{1, cap};
}

/// One increment.  Throws if the counter sits at its cap; machines that embed
/// a capped counter must detect saturation before feeding it again.
inline void increment(MorrisCounter& c, RandomSource& src) {
    if (c.at_cap()) throw std::logic_error("increment: counter saturated");
    if (src.bernoulli_pow2(static_cast<unsigned>(c.state))) ++c.state;
}

/// Applies k increments by sampling the geometric dwell time at each state
/// instead of tossing k coins; identical in distribution to k calls of
/// increment().  Stops early when the cap is reached and returns the unspent
/// budget (0 when all k increments were applied).
inline std::uint64_t increment_many(MorrisCounter& c, std::uint64_t k, RandomSource& src) {
    while (k > 0) {
        if (c.at_cap()) return k;
        const std::uint64_t dwell = src.geometric_pow2(static_cast<unsigned>(c.state));
        if (dwell > k) return 0;
        k -= dwell;
        ++c.state;
    }
    return 0;
}

/// Exact distribution of the counter state after a fixed number of increments.
struct MorrisLaw {
    std::uint64_t increments = 0;
    int cap = 0;                // 0: s_max was only a truncation horizon
    std::vector<double> probs;  // probs[s-1] = P(state == s)
    // cap > 0: probability the counter saturated within the budget; equals
    // the top cell since the cap absorbs.
    // cap == 0: mass that crossed the truncation horizon, i.e. the exact
    // truncation error of the top cell (the chain is monotone).
    double would_saturate = 0.0;
};

/// Law of the state after m increments, computed by exact dynamic programming
/// over at most `top` states.  With capped == false, `top` is a truncation
/// horizon the caller should place ~64 states above log2(m); with
/// capped == true it is the physical cap and the top state absorbs.
inline MorrisLaw morris_law(std::uint64_t m, int top, bool capped = false) {
    if (top < 1) throw std::invalid_argument("morris_law: need at least one state");
    std::vector<double> p(static_cast<std::size_t>(top), 0.0);
    std::vector<double> next(static_cast<std::size_t>(top), 0.0);
    p[0] = 1.0;
    std::vector<double> adv(static_cast<std::size_t>(top));
    for (int s = 1; s <= top; ++s) adv[s - 1] = std::ldexp(1.0, -s);
    int hi = 1;
    double refused = 0.0;
    for (std::uint64_t t = 0; t < m; ++t) {
        const int reach = std::min(top, hi + 1);
        if (top >= 1) refused += (p[static_cast<std::size_t>(top - 1)] - refused) * adv[top - 1];
        for (int s = 1; s <= reach; ++s) {
            double stay = p[s - 1];
            if (s < top) stay *= (1.0 - adv[s - 1]); // top state never leaves
            const double inflow = (s >= 2) ? p[s - 2] * adv[s - 2] : 0.0;
            next[s - 1] = stay + inflow;
        }
        for (int s = 1; s <= reach; ++s) p[s - 1] = next[s - 1];
        hi = reach;
    }
    const double saturated = capped ? p[static_cast<std::size_t>(top - 1)] : refused;
    return MorrisLaw{m, capped ? top : 0, std::move(p), saturated};
}

/// E[state] after m increments; truncation horizon log2(m) + 64 keeps the
/// neglected mass far below double precision.
inline double expected_state(std::uint64_t m) {
    const int top = static_cast<int>(std::ceil(std::log2(static_cast<double>(m == 0 ? 1 : m) + 1.0))) + 64;
    const MorrisLaw law = morris_law(m, top, false);
    double e = 0.0;
    for (std::size_t s = law.probs.size(); s-- > 0;)
        e += static_cast<double>(s + 1) * law.probs[s];
    return e;
}

/// E[state] after t increments for every t = 0..m, from one DP sweep.
inline std::vector<double> expected_state_curve(std::uint64_t m) {
    const int top = static_cast<int>(std::ceil(std::log2(static_cast<double>(m + 1)))) + 64;
    std::vector<double> p(static_cast<std::size_t>(top), 0.0);
    p[0] = 1.0;
    std::vector<double> adv(static_cast<std::size_t>(top));
    for (int s = 1; s <= top; ++s) adv[s - 1] = std::ldexp(1.0, -s);
    std::vector<double> curve;
    curve.reserve(m + 1);
    curve.push_back(1.0);
    int hi = 1;
    for (std::uint64_t t = 0; t < m; ++t) {
        const int reach = std::min(top, hi + 1);
        for (int s = reach; s >= 2; --s)
            p[s - 1] = p[s - 1] * (1.0 - adv[s - 1]) + p[s - 2] * adv[s - 2];
        p[0] *= (1.0 - adv[0]);
        hi = reach;
        double e = 0.0;
        for (int s = hi; s >= 1; --s) e += static_cast<double>(s) * p[s - 1];
        curve.push_back(e);
    }
    return curve;
}

/// Envelope on the vanishing error term of E[state] = log2 m + mu + g + phi:
/// min{1, 2^sqrt(16 log2 m) (log2 m)^4.5 / (2m)}.  Tiny only for very large m;
/// the min clamps it to 1 elsewhere.
inline double phi_bound(std::uint64_t m) {
    if (m == 0) throw std::invalid_argument("phi_bound: m >= 1 required");
    if (m == 1) return 0.0;
    const double L = std::log2(static_cast<double>(m));
    const double log2_val = std::sqrt(16.0 * L) + 4.5 * std::log2(L) - (L + 1.0);
    if (log2_val >= 0.0) return 1.0;
    return std::min(1.0, std::exp2(log2_val));
}

/// Precomputed laws of a capped counter after k = 0..k_max increments, stored
/// as per-k CDF rows.  sample(k) draws a final state in O(cap); for k beyond
/// the table it falls back to dwell simulation.  Immutable after construction,
/// so shared use across threads is safe.
class CappedLawTable {
public:
    CappedLawTable(int cap, std::uint64_t k_max) : cap_(cap), k_max_(k_max) {
        if (cap < 2) throw std::invalid_argument("CappedLawTable: cap must be >= 2");
        const std::size_t w = static_cast<std::size_t>(cap);
        cdf_.resize((k_max + 1) * w);
        std::vector<double> p(w, 0.0), adv(w);
        p[0] = 1.0;
        for (int s = 1; s <= cap; ++s) adv[s - 1] = std::ldexp(1.0, -s);
        for (std::uint64_t k = 0; k <= k_max; ++k) {
            double acc = 0.0;
            for (std::size_t s = 0; s < w; ++s) {
                acc += p[s];
                cdf_[k * w + s] = acc;
            }
            cdf_[k * w + (w - 1)] = 1.0; // guard against rounding drift
            for (std::size_t s = w - 1; s >= 1; --s)
                p[s] = p[s] * (s + 1 == w ? 1.0 : (1.0 - adv[s])) + p[s - 1] * adv[s - 1];
            p[0] *= (1.0 - adv[0]);
        }
    }

    int cap() const noexcept { return cap_; }
    std::uint64_t k_max() const noexcept { return k_max_; }

    double prob(std::uint64_t k, int state) const {
        const std::size_t w = static_cast<std::size_t>(cap_);
        const double hi = cdf_[k * w + static_cast<std::size_t>(state - 1)];
        const double lo = state >= 2 ? cdf_[k * w + static_cast<std::size_t>(state - 2)] : 0.0;
        return hi - lo;
    }

    /// Final state after k increments from state 1 (== cap means the cap was
    /// reached at some point: the absorbing top state).
    int sample(std::uint64_t k, RandomSource& src) const {
        if (k > k_max_) {
            MorrisCounter c{1, cap_};
            increment_many(c, k, src);
            return c.state;
        }
        const std::size_t w = static_cast<std::size_t>(cap_);
        const double u = src.next_double();
        const double* row = cdf_.data() + k * w;
        for (std::size_t s = 0; s + 1 < w; ++s)
            if (u < row[s]) return static_cast<int>(s) + 1;
        return cap_;
    }

private:
    int cap_;
    std::uint64_t k_max_;
    std::vector<double> cdf_;
};

} // namespace fse
