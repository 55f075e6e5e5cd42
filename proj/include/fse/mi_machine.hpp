#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

#include "fse/bias_fsm.hpp"
#include "fse/calibration.hpp"
#include "fse/distribution.hpp"
#include "fse/entropy_machine.hpp"
#include "fse/morris.hpp"
#include "fse/random.hpp"

namespace fse {

/// Streaming mutual-information estimator over pairs (x, y).  Same window
/// protocol as the entropy machine, but the probe is a pair and three
/// approximate counters track x-matches, y-matches and joint matches; the
/// concluded window feeds Bernoulli((4M - (Cx + Cy - Cxy)) / 6M) into the
/// bias chain, so the read-out targets H(X) + H(Y) - H(X,Y).
class MIMachine {
public:
    using Event = EntropyMachine::Event;

    struct FeedResult {
        Event event = Event::none;
        double theta = 0.0;
        int counter_x = 0;
        int counter_y = 0;
        int counter_xy = 0;
    };

    explicit MIMachine(const Calibration& cal) : cal_(cal) {
        if (cal.variant != Variant::mutual_information)
            throw std::invalid_argument("MIMachine: calibration is not an MI calibration");
        if (cal.n < 2 || cal.m2 < 2)
            throw std::invalid_argument("MIMachine: both alphabets must have size >= 2");
        if (cal.M < 2) throw std::invalid_argument("MIMachine: clock cap must be >= 2");
        if (cal.s_bias < 2) throw std::invalid_argument("MIMachine: bias chain needs >= 2 states");
        unsigned __int128 total = static_cast<unsigned __int128>(cal.n);
        total *= static_cast<unsigned __int128>(cal.m2);
        total *= static_cast<unsigned __int128>(cal.M);
        const unsigned __int128 side = static_cast<unsigned __int128>(2 * cal.M);
        total *= side * side * side;
        total *= static_cast<unsigned __int128>(cal.s_bias);
        if (total > (static_cast<unsigned __int128>(1) << 63))
            throw std::invalid_argument("MIMachine: state space exceeds 2^63");
        clock_ = morris_counter(cal.M);
        cx_ = morris_counter(2 * cal.M);
        cy_ = morris_counter(2 * cal.M);
        cxy_ = morris_counter(2 * cal.M);
        bias_ = bias_machine(cal.s_bias);
        imax_ = std::log2(static_cast<double>(std::min(cal.n, cal.m2)));
    }

    const Calibration& calibration() const noexcept { return cal_; }

    FeedResult feed(int x, int y, RandomSource& src) {
        if (x < 0 || x >= cal_.n || y < 0 || y >= cal_.m2)
            throw std::out_of_range("MIMachine::feed: pair outside [n] x [m2]");
        if (clock_.state == 1) {
            probe_x_ = x;
            probe_y_ = y;
            cx_.state = 1;
            cy_.state = 1;
            cxy_.state = 1;
            increment(clock_, src);
        } else {
            increment(clock_, src);
            const bool mx = x == probe_x_;
            const bool my = y == probe_y_;
            if (mx) increment(cx_, src);
            if (my) increment(cy_, src);
            if (mx && my) increment(cxy_, src);
        }
        ++samples_;
        return finish_window(src);
    }

    /// Whole-window injection: `length` pairs consumed, ending with the three
    /// counters at (cx, cy, cxy).  Any counter at 2M aborts the window.
    void apply_window(std::uint64_t length, int cx, int cy, int cxy, RandomSource& src) {
        const int cap = 2 * cal_.M;
        if (cx < 1 || cx > cap || cy < 1 || cy > cap || cxy < 1 || cxy > cap)
            throw std::out_of_range("MIMachine::apply_window: counter outside [1, 2M]");
        samples_ += length;
        if (cx == cap || cy == cap || cxy == cap) {
            ++saturation_resets_;
            return;
        }
        record(cx + cy - cxy, src);
    }

    double bias_level() const noexcept { return bias_estimate(bias_); }

    double estimate_raw() const noexcept {
        return 6.0 * cal_.M * (bias_estimate(bias_) - cal_.a);
    }

    double estimate() const noexcept {
        const double raw = estimate_raw();
        if (raw < 0.0) return 0.0;
        if (raw > imax_) return imax_;
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
    int counter_x_state() const noexcept { return cx_.state; }
    int counter_y_state() const noexcept { return cy_.state; }
    int counter_xy_state() const noexcept { return cxy_.state; }
    std::int64_t bias_state() const noexcept { return bias_.state; }
    std::pair<int, int> probe() const noexcept { return {probe_x_, probe_y_}; }

    /// Bijection onto [0, n * m2 * M * (2M)^3 * s_bias); probe digit fixed to
    /// 0 in the canonical between-window state (clock at 1).
    std::uint64_t state_index() const noexcept {
        const std::uint64_t pair =
            clock_.state == 1
                ? 0
                : static_cast<std::uint64_t>(probe_x_) * static_cast<std::uint64_t>(cal_.m2) +
                      static_cast<std::uint64_t>(probe_y_);
        const std::uint64_t side = static_cast<std::uint64_t>(2 * cal_.M);
        unsigned __int128 idx = pair;
        idx = idx * static_cast<std::uint64_t>(cal_.M) + static_cast<std::uint64_t>(clock_.state - 1);
        idx = idx * side + static_cast<std::uint64_t>(cx_.state - 1);
        idx = idx * side + static_cast<std::uint64_t>(cy_.state - 1);
        idx = idx * side + static_cast<std::uint64_t>(cxy_.state - 1);
        idx = idx * static_cast<std::uint64_t>(cal_.s_bias) + static_cast<std::uint64_t>(bias_.state - 1);
        return static_cast<std::uint64_t>(idx);
    }

    static MIMachine decode(const Calibration& cal, std::uint64_t index) {
        MIMachine m(cal);
        std::uint64_t rest = index;
        const auto peel = [&rest](std::uint64_t base) {
            const std::uint64_t digit = rest % base;
            rest /= base;
            return digit;
        };
        const std::uint64_t side = static_cast<std::uint64_t>(2 * cal.M);
        const std::int64_t bias = static_cast<std::int64_t>(peel(static_cast<std::uint64_t>(cal.s_bias))) + 1;
        const int cxy = static_cast<int>(peel(side)) + 1;
        const int cy = static_cast<int>(peel(side)) + 1;
        const int cx = static_cast<int>(peel(side)) + 1;
        const int clock = static_cast<int>(peel(static_cast<std::uint64_t>(cal.M))) + 1;
        if (rest >= static_cast<std::uint64_t>(cal.n) * static_cast<std::uint64_t>(cal.m2))
            throw std::out_of_range("MIMachine::decode: index outside the state space");
        const int px = static_cast<int>(rest / static_cast<std::uint64_t>(cal.m2));
        const int py = static_cast<int>(rest % static_cast<std::uint64_t>(cal.m2));
        if (clock == 1 && (px != 0 || py != 0 || cx != 1 || cy != 1 || cxy != 1))
            throw std::invalid_argument("MIMachine::decode: non-canonical between-window state");
        m.clock_.state = clock;
        m.cx_.state = cx;
        m.cy_.state = cy;
        m.cxy_.state = cxy;
        m.bias_.state = bias;
        m.probe_x_ = clock == 1 ? -1 : px;
        m.probe_y_ = clock == 1 ? -1 : py;
        return m;
    }

private:
    FeedResult finish_window(RandomSource& src) {
        if (cx_.at_cap() || cy_.at_cap() || cxy_.at_cap()) {
            FeedResult r{Event::aborted, 0.0, cx_.state, cy_.state, cxy_.state};
            ++saturation_resets_;
            reset_window();
            return r;
        }
        if (clock_.at_cap()) {
            FeedResult r{Event::concluded, 0.0, cx_.state, cy_.state, cxy_.state};
            r.theta = record(cx_.state + cy_.state - cxy_.state, src);
            reset_window();
            return r;
        }
        return {};
    }

    /// Feed one concluded window's combined counter Cx + Cy - Cxy into the
    /// bias chain.  The combination lies in [3 - 2M, 4M - 3], so theta stays
    /// inside (0, 1).
    double record(int combined, RandomSource& src) {
        const double theta =
            (4.0 * cal_.M - static_cast<double>(combined)) / (6.0 * cal_.M);
        const bool bit = src.bernoulli(theta);
        bias_step(bias_, bit, src);
        ++increments_;
        return theta;
    }

    void reset_window() noexcept {
        clock_.state = 1;
        cx_.state = 1;
        cy_.state = 1;
        cxy_.state = 1;
        probe_x_ = -1;
        probe_y_ = -1;
    }

    Calibration cal_;
    MorrisCounter clock_;
    MorrisCounter cx_;
    MorrisCounter cy_;
    MorrisCounter cxy_;
    BiasMachine bias_;
    int probe_x_ = -1;
    int probe_y_ = -1;
    double imax_ = 0.0;
    std::uint64_t increments_ = 0;
    std::uint64_t samples_ = 0;
    std::uint64_t saturation_resets_ = 0;
};

/// Whole-window sampler for the MI machine.  Per window: draw the probe pair,
/// split the remaining N' symbols into (both match, x only, y only) via
/// sequential conditional binomials, then draw each counter's reaction from
/// the capped counter law.  Given the three tick counts the counters evolve
/// with disjoint coin draws, so the three final states are conditionally
/// independent.
class MIWindowEngine {
public:
    struct Window {
        std::uint64_t length = 0;
        int counter_x = 0;
        int counter_y = 0;
        int counter_xy = 0;
        double theta = 0.0;
        bool aborted = false;
    };

    MIWindowEngine(const Calibration& cal, JointDistribution joint)
        : cal_(cal),
          joint_(std::move(joint)),
          nprime_(cal.M),
          law_(2 * cal.M, kLawDepth) {
        if (cal.variant != Variant::mutual_information)
            throw std::invalid_argument("MIWindowEngine: calibration is not an MI calibration");
        if (joint_.n() != cal.n || joint_.m2() != cal.m2)
            throw std::invalid_argument("MIWindowEngine: joint support != [n] x [m2]");
    }

    const Calibration& calibration() const noexcept { return cal_; }
    const JointDistribution& joint() const noexcept { return joint_; }

    Window sample_window(RandomSource& src) const {
        const std::uint64_t tau1 = src.geometric_pow2(1);
        const std::uint64_t rest = nprime_.sample(src);
        const auto [x, y] = joint_.sample(src);
        const double q_both = joint_.at(x, y);
        const double q_xonly = std::max(0.0, joint_.marginal_x(x) - q_both);
        const double q_yonly = std::max(0.0, joint_.marginal_y(y) - q_both);

        const std::uint64_t k_both = binomial(src, rest, q_both);
        const double rem1 = 1.0 - q_both;
        const std::uint64_t k_xonly =
            rem1 > 0.0 ? binomial(src, rest - k_both, std::min(1.0, q_xonly / rem1)) : 0;
        const double rem2 = rem1 - q_xonly;
        const std::uint64_t k_yonly =
            rem2 > 0.0 ? binomial(src, rest - k_both - k_xonly, std::min(1.0, q_yonly / rem2)) : 0;

        Window w;
        w.length = tau1 + rest;
        w.counter_x = law_.sample(k_both + k_xonly, src);
        w.counter_y = law_.sample(k_both + k_yonly, src);
        w.counter_xy = law_.sample(k_both, src);
        const int cap = 2 * cal_.M;
        w.aborted = w.counter_x == cap || w.counter_y == cap || w.counter_xy == cap;
        if (!w.aborted) {
            const int combined = w.counter_x + w.counter_y - w.counter_xy;
            w.theta = (4.0 * cal_.M - static_cast<double>(combined)) / (6.0 * cal_.M);
        }
        return w;
    }

    void drive(MIMachine& machine, std::uint64_t increments, RandomSource& src) const {
        while (increments > 0) {
            const Window w = sample_window(src);
            machine.apply_window(w.length, w.counter_x, w.counter_y, w.counter_xy, src);
            if (!w.aborted) --increments;
        }
    }

private:
    static constexpr std::uint64_t kLawDepth = 4096;

    Calibration cal_;
    JointDistribution joint_;
    detail::WindowLengthSampler nprime_;
    CappedLawTable law_;
};

inline MIMachine run_accelerated_mi(const Calibration& cal, const JointDistribution& joint,
                                    std::uint64_t increments, RandomSource& src) {
    MIWindowEngine engine(cal, joint);
    MIMachine machine(cal);
    engine.drive(machine, increments, src);
    return machine;
}

inline MIMachine run_faithful_mi(const Calibration& cal, const JointDistribution& joint,
                                 std::uint64_t increments, RandomSource& src) {
    MIMachine machine(cal);
    while (machine.increments() < increments) {
        const auto [x, y] = joint.sample(src);
        machine.feed(x, y, src);
    }
    return machine;
}

/// Monte Carlo E[theta] over concluded MI windows; `bias_hat` is the implied
/// estimator bias 6M(theta_hat - a) - I(X;Y).
struct MIOracleResult {
    double theta_hat = 0.0;
    double implied_estimate = 0.0;
    double bias_hat = 0.0;
    double i_true = 0.0;
    std::uint64_t windows = 0;
    std::uint64_t aborted = 0;
};

inline MIOracleResult theta_oracle_mi(const MIWindowEngine& engine, std::uint64_t windows,
                                      RandomSource& src) {
    if (windows == 0) throw std::invalid_argument("theta_oracle_mi: need at least one window");
    const Calibration& cal = engine.calibration();
    MIOracleResult r;
    double sum = 0.0;
    while (r.windows < windows) {
        const MIWindowEngine::Window w = engine.sample_window(src);
        if (w.aborted) {
            ++r.aborted;
            continue;
        }
        sum += w.theta;
        ++r.windows;
    }
    r.theta_hat = sum / static_cast<double>(r.windows);
    r.implied_estimate = 6.0 * cal.M * (r.theta_hat - cal.a);
    r.i_true = engine.joint().mutual_information();
    r.bias_hat = r.implied_estimate - r.i_true;
    return r;
}

inline MIOracleResult theta_oracle_mi(const Calibration& cal, const JointDistribution& joint,
                                      std::uint64_t windows, RandomSource& src) {
    MIWindowEngine engine(cal, joint);
    return theta_oracle_mi(engine, windows, src);
}

}  // namespace fse
