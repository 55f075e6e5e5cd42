#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fse/bias_fsm.hpp"
#include "fse/calibration.hpp"
#include "fse/distribution.hpp"
#include "fse/morris.hpp"
#include "fse/random.hpp"

namespace fse {

/// Resource/estimate snapshot of a running machine.
struct MachineReport {
    std::uint64_t increments = 0;         ///< bias-machine updates performed
    std::uint64_t samples = 0;            ///< stream symbols consumed
    std::uint64_t saturation_resets = 0;  ///< windows discarded at the symbol cap
    double estimate_raw = 0.0;
    double estimate = 0.0;  ///< raw clamped to [0, log2 n]
};

/// Streaming entropy estimator: one approximate clock, one approximate
/// match counter, one bias-averaging chain.  Memory is the product of the
/// three state spaces plus the probe symbol.
///
/// Window protocol, per incoming symbol x:
///   clock at 1  -> store x as the probe, reset the match counter, tick the
///                  clock (the dwell in clock state 1 is folded into the
///                  same step, so a window occupies >= 1 symbols);
///   clock >  1  -> tick the clock; if x equals the probe, tick the counter.
/// After either branch: counter at its cap 2M -> discard the window (reset,
/// nothing recorded); clock at its cap M with counter below 2M -> conclude,
/// feed Bernoulli(1 - C/(2M)) into the bias chain, reset.
///
/// The post-branch checks are shared by both branches; for M >= 3 the
/// counter cannot reach cap on the probe-setting step, so this coincides
/// with checking only after the second branch, while keeping M = 2 (where
/// the clock concludes immediately) well defined.
class EntropyMachine {
public:
    enum class Event { none, concluded, aborted };

    /// Outcome of one feed() step.  `theta` and `counter` are populated for
    /// concluded windows; aborted windows report the saturated counter.
    struct FeedResult {
        Event event = Event::none;
        double theta = 0.0;
        int counter = 0;
    };

    explicit EntropyMachine(const Calibration& cal) : cal_(cal) {
        if (cal.variant != Variant::entropy)
            throw std::invalid_argument("EntropyMachine: calibration is not an entropy calibration");
        if (cal.n < 2) throw std::invalid_argument("EntropyMachine: alphabet size must be >= 2");
        if (cal.M < 2) throw std::invalid_argument("EntropyMachine: clock cap must be >= 2");
        if (cal.s_bias < 2) throw std::invalid_argument("EntropyMachine: bias chain needs >= 2 states");
        // The state index below must fit in 64 bits.
        unsigned __int128 total = static_cast<unsigned __int128>(cal.n);
        total *= static_cast<unsigned __int128>(cal.M);
        total *= static_cast<unsigned __int128>(2 * cal.M);
        total *= static_cast<unsigned __int128>(cal.s_bias);
        if (total > (static_cast<unsigned __int128>(1) << 63))
            throw std::invalid_argument("EntropyMachine: state space exceeds 2^63");
        clock_ = morris_counter(cal.M);
        symbol_ = morris_counter(2 * cal.M);
        bias_ = bias_machine(cal.s_bias);
        hmax_ = std::log2(static_cast<double>(cal.n));
    }

    const Calibration& calibration() const noexcept { return cal_; }

    /// Consume one stream symbol.  x must lie in [0, n).
    FeedResult feed(int x, RandomSource& src) {
        if (x < 0 || x >= cal_.n) throw std::out_of_range("EntropyMachine::feed: symbol outside [0, n)");
        if (clock_.state == 1) {
            probe_ = x;
            symbol_.state = 1;
            increment(clock_, src);
        } else {
            increment(clock_, src);
            if (x == probe_) increment(symbol_, src);
        }
        ++samples_;
        return finish_window(src);
    }

    /// Account for a whole window sampled externally: `length` stream
    /// symbols ending with match counter `counter`.  counter == 2M means
    /// the window aborted; anything below concludes.  Distributionally
    /// equivalent to feeding the symbols one by one.
    void apply_window(std::uint64_t length, int counter, RandomSource& src) {
        if (counter < 1 || counter > 2 * cal_.M)
            throw std::out_of_range("EntropyMachine::apply_window: counter outside [1, 2M]");
        samples_ += length;
        if (counter == 2 * cal_.M) {
            ++saturation_resets_;
            return;
        }
        record(counter, src);
    }

    double bias_level() const noexcept { return bias_estimate(bias_); }

    double estimate_raw() const noexcept {
        return 2.0 * cal_.M * (bias_estimate(bias_) - cal_.a);
    }

    double estimate() const noexcept {
        const double raw = estimate_raw();
        if (raw < 0.0) return 0.0;
        if (raw > hmax_) return hmax_;
        return raw;
    }

    MachineReport report() const noexcept {
        MachineReport r;
        r.increments = increments_;
        r.samples = samples_;
        r.saturation_resets = saturation_resets_;
        r.estimate_raw = estimate_raw();
        r.estimate = estimate();
        return r;
    }

    std::uint64_t increments() const noexcept { return increments_; }
    std::uint64_t samples() const noexcept { return samples_; }
    std::uint64_t saturation_resets() const noexcept { return saturation_resets_; }

    int clock_state() const noexcept { return clock_.state; }
    int symbol_state() const noexcept { return symbol_.state; }
    std::int64_t bias_state() const noexcept { return bias_.state; }
    int probe() const noexcept { return probe_; }

    /// Bijection from live states onto [0, n * M * 2M * s_bias).  Between
    /// windows the machine is canonical (clock 1, counter 1, no probe), so
    /// the probe digit is fixed to 0 whenever the clock is at 1.
    std::uint64_t state_index() const noexcept {
        unsigned __int128 idx = clock_.state == 1 ? 0 : static_cast<unsigned __int128>(probe_);
        idx = idx * static_cast<std::uint64_t>(cal_.M) + static_cast<std::uint64_t>(clock_.state - 1);
        idx = idx * static_cast<std::uint64_t>(2 * cal_.M) + static_cast<std::uint64_t>(symbol_.state - 1);
        idx = idx * static_cast<std::uint64_t>(cal_.s_bias) + static_cast<std::uint64_t>(bias_.state - 1);
        return static_cast<std::uint64_t>(idx);
    }

    /// Inverse of state_index().  Rejects indices that name a non-canonical
    /// between-window state.
    static EntropyMachine decode(const Calibration& cal, std::uint64_t index) {
        EntropyMachine m(cal);
        std::uint64_t rest = index;
        const auto peel = [&rest](std::uint64_t base) {
            const std::uint64_t digit = rest % base;
            rest /= base;
            return digit;
        };
        const std::int64_t bias = static_cast<std::int64_t>(peel(static_cast<std::uint64_t>(cal.s_bias))) + 1;
        const int sym = static_cast<int>(peel(static_cast<std::uint64_t>(2 * cal.M))) + 1;
        const int clock = static_cast<int>(peel(static_cast<std::uint64_t>(cal.M))) + 1;
        if (rest >= static_cast<std::uint64_t>(cal.n))
            throw std::out_of_range("EntropyMachine::decode: index outside the state space");
        const int probe = static_cast<int>(rest);
        if (clock == 1 && (probe != 0 || sym != 1))
            throw std::invalid_argument("EntropyMachine::decode: non-canonical between-window state");
        m.clock_.state = clock;
        m.symbol_.state = sym;
        m.bias_.state = bias;
        m.probe_ = clock == 1 ? -1 : probe;
        return m;
    }

private:
    FeedResult finish_window(RandomSource& src) {
        if (symbol_.at_cap()) {
            const int c = symbol_.state;
            ++saturation_resets_;
            reset_window();
            return {Event::aborted, 0.0, c};
        }
        if (clock_.at_cap()) {
            const int c = symbol_.state;
            const double theta = record(c, src);
            reset_window();
            return {Event::concluded, theta, c};
        }
        return {};
    }

    /// Feed one concluded window's counter into the bias chain.
    double record(int counter, RandomSource& src) {
        const double theta = 1.0 - static_cast<double>(counter) / (2.0 * cal_.M);
        const bool bit = src.bernoulli(theta);
        bias_step(bias_, bit, src);
        ++increments_;
        return theta;
    }

    void reset_window() noexcept {
        clock_.state = 1;
        symbol_.state = 1;
        probe_ = -1;
    }

    Calibration cal_;
    MorrisCounter clock_;
    MorrisCounter symbol_;
    BiasMachine bias_;
    int probe_ = -1;
    double hmax_ = 0.0;
    std::uint64_t increments_ = 0;
    std::uint64_t samples_ = 0;
    std::uint64_t saturation_resets_ = 0;
};

namespace detail {

/// Sampler for the post-dwell window length N' = sum_{k=2}^{M-1} Geo(2^-k):
/// the time the clock spends in states 2..M-1.  (The state-1 dwell is a
/// plain Geo(1/2) the caller draws separately.)  When the support fits, the
/// exact pmf is tabled behind an alias structure; otherwise the stage dwells
/// are drawn directly.
class WindowLengthSampler {
public:
    static constexpr std::size_t kMaxSupport = std::size_t{1} << 21;

    explicit WindowLengthSampler(int clock_cap) : M_(clock_cap) {
        if (M_ < 2) throw std::invalid_argument("WindowLengthSampler: clock cap must be >= 2");
        if (M_ == 2) return;  // no intermediate states: N' == 0
        // Mean is sum 2^k = 2^M - 4; the slowest stage mixes at rate
        // 2^-(M-1).  Double the horizon until the missing tail mass is
        // negligible, giving up if the table would be too large.
        std::vector<double> rates(static_cast<std::size_t>(M_ - 2));
        for (int k = 2; k <= M_ - 1; ++k) rates[static_cast<std::size_t>(k - 2)] = std::ldexp(1.0, -k);
        const double mean = std::ldexp(1.0, M_) - 4.0;
        std::size_t horizon = 64;
        while (horizon < static_cast<std::size_t>(mean) * 2) horizon *= 2;
        while (horizon <= kMaxSupport) {
            ConvPmf conv = geometric_sum_pmf(rates, horizon);
            if (conv.deficit < 0x1p-50) {
                std::size_t lo = 0;
                while (lo < conv.pmf.size() && conv.pmf[lo] == 0.0) ++lo;
                offset_ = lo;
                table_ = AliasTable(std::vector<double>(conv.pmf.begin() + static_cast<std::ptrdiff_t>(lo),
                                                        conv.pmf.end()));
                tabled_ = true;
                return;
            }
            horizon *= 2;
        }
        // fall through: sample stage by stage
    }

    bool tabled() const noexcept { return tabled_; }

    std::uint64_t sample(RandomSource& src) const {
        if (M_ == 2) return 0;
        if (tabled_) return offset_ + table_.sample(src);
        std::uint64_t total = 0;
        for (int k = 2; k <= M_ - 1; ++k) total += src.geometric_pow2(static_cast<unsigned>(k));
        return total;
    }

private:
    int M_;
    bool tabled_ = false;
    std::uint64_t offset_ = 0;
    AliasTable table_;
};

}  // namespace detail

/// Samples whole windows of the entropy machine in O(1) expected time by
/// drawing (length, final counter) from their joint law directly: the probe
/// is drawn from the source, the number of probe matches in the remaining
/// N' symbols is Binomial(N', p_probe), and the counter's reaction to that
/// many ticks comes from the capped counter law.
class EntropyWindowEngine {
public:
    struct Window {
        std::uint64_t length = 0;  ///< stream symbols the window consumed
        int counter = 0;           ///< final match-counter state (2M = aborted)
        double theta = 0.0;
        bool aborted = false;
    };

    EntropyWindowEngine(const Calibration& cal, DiscreteDistribution dist)
        : cal_(cal),
          dist_(std::move(dist)),
          nprime_(cal.M),
          law_(2 * cal.M, kLawDepth) {
        if (cal.variant != Variant::entropy)
            throw std::invalid_argument("EntropyWindowEngine: calibration is not an entropy calibration");
        if (dist_.size() != cal.n)
            throw std::invalid_argument("EntropyWindowEngine: distribution support != n");
    }

    const Calibration& calibration() const noexcept { return cal_; }
    const DiscreteDistribution& distribution() const noexcept { return dist_; }

    Window sample_window(RandomSource& src) const {
        const std::uint64_t tau1 = src.geometric_pow2(1);
        const std::uint64_t rest = nprime_.sample(src);
        const int x = dist_.sample(src);
        const std::uint64_t hits = binomial(src, rest, dist_.prob(x));
        const int c = law_.sample(hits, src);
        Window w;
        w.length = tau1 + rest;
        w.counter = c;
        w.aborted = c == 2 * cal_.M;
        if (!w.aborted) w.theta = 1.0 - static_cast<double>(c) / (2.0 * cal_.M);
        return w;
    }

    /// Drive `machine` until it has performed `increments` more bias updates.
    void drive(EntropyMachine& machine, std::uint64_t increments, RandomSource& src) const {
        while (increments > 0) {
            const Window w = sample_window(src);
            machine.apply_window(w.length, w.counter, src);
            if (!w.aborted) --increments;
        }
    }

private:
    static constexpr std::uint64_t kLawDepth = 4096;

    Calibration cal_;
    DiscreteDistribution dist_;
    detail::WindowLengthSampler nprime_;
    CappedLawTable law_;
};

/// Run a fresh machine for `increments` bias updates using whole-window
/// sampling.  Matches the symbol-by-symbol run in distribution.
inline EntropyMachine run_accelerated(const Calibration& cal, const DiscreteDistribution& dist,
                                      std::uint64_t increments, RandomSource& src) {
    EntropyWindowEngine engine(cal, dist);
    EntropyMachine machine(cal);
    engine.drive(machine, increments, src);
    return machine;
}

/// Run a fresh machine symbol by symbol for `increments` bias updates.
inline EntropyMachine run_faithful(const Calibration& cal, const DiscreteDistribution& dist,
                                   std::uint64_t increments, RandomSource& src) {
    EntropyMachine machine(cal);
    while (machine.increments() < increments) machine.feed(dist.sample(src), src);
    return machine;
}

/// Direct Monte Carlo estimate of E[theta] over concluded windows, bypassing
/// the bias chain entirely.  `bias_hat` is the implied estimator bias
/// 2M(theta_hat - a) - H(p); it isolates the window-law error from the
/// chain's averaging error.
struct ThetaOracleResult {
    double theta_hat = 0.0;
    double implied_estimate = 0.0;
    double bias_hat = 0.0;
    double h_true = 0.0;
    std::uint64_t windows = 0;
    std::uint64_t aborted = 0;
};

inline ThetaOracleResult theta_oracle(const EntropyWindowEngine& engine, std::uint64_t windows,
                                      RandomSource& src) {
    if (windows == 0) throw std::invalid_argument("theta_oracle: need at least one window");
    const Calibration& cal = engine.calibration();
    ThetaOracleResult r;
    double sum = 0.0;
    while (r.windows < windows) {
        const EntropyWindowEngine::Window w = engine.sample_window(src);
        if (w.aborted) {
            ++r.aborted;
            continue;
        }
        sum += w.theta;
        ++r.windows;
    }
    r.theta_hat = sum / static_cast<double>(r.windows);
    r.implied_estimate = 2.0 * cal.M * (r.theta_hat - cal.a);
    r.h_true = engine.distribution().entropy();
    r.bias_hat = r.implied_estimate - r.h_true;
    return r;
}

inline ThetaOracleResult theta_oracle(const Calibration& cal, const DiscreteDistribution& dist,
                                      std::uint64_t windows, RandomSource& src) {
    EntropyWindowEngine engine(cal, dist);
    return theta_oracle(engine, windows, src);
}

}  // namespace fse
