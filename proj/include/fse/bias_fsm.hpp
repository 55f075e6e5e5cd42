#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fse/random.hpp"

namespace fse {

/// Finite-state estimator of the bias of a Bernoulli input stream.
///
/// With S states the machine performs a lazy random walk on {1..S}: on input
/// bit x it draws B ~ Bernoulli((state-1)/(S-1)) and moves up on x=1, B=0,
/// down on x=0, B=1.  Reading (state-1)/(S-1) estimates the input bias with
/// stationary MSE p(1-p)/(S-1); the boundary moves saturate by construction.
struct BiasMachine {
    std::int64_t num_states = 2;
    std::int64_t state = 1;
};

inline BiasMachine bias_machine(std::int64_t S) {
    if (S < 2) throw std::invalid_argument("bias_machine: S >= 2 required");
    return BiasMachine{S, 1};
}

inline void bias_step(BiasMachine& m, bool bit, RandomSource& src) {
    const double level = static_cast<double>(m.state - 1) /
                         static_cast<double>(m.num_states - 1);
    const bool b = src.bernoulli(level);
    if (bit) {
        if (!b) ++m.state;
    } else {
        if (b) --m.state;
    }
}

inline double bias_estimate(const BiasMachine& m) noexcept {
    return static_cast<double>(m.state - 1) / static_cast<double>(m.num_states - 1);
}

// ---------------------------------------------------------------------------
// Chain analysis: the walk above is a birth-death chain whose stationary law
// is Binomial(S-1, p) when the input is i.i.d. Bernoulli(p).
// ---------------------------------------------------------------------------

/// Row-stochastic transition matrix of the S-state walk under input bias p.
inline Eigen::MatrixXd transition_matrix(int S, double p) {
    if (S < 2) throw std::invalid_argument("transition_matrix: S >= 2 required");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("transition_matrix: p in [0,1]");
    const double q = 1.0 - p;
    const double d = static_cast<double>(S - 1);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(S, S);
    for (int k = 1; k <= S; ++k) {
        const double up = (static_cast<double>(S - k) / d) * p;
        const double down = (static_cast<double>(k - 1) / d) * q;
        if (k < S) P(k - 1, k) = up;
        if (k > 1) P(k - 1, k - 2) = down;
        P(k - 1, k - 1) = 1.0 - up - down;
    }
    return P;
}

/// Stationary law in closed form: pi_k = C(S-1, k-1) p^(k-1) q^(S-k).
inline std::vector<double> stationary_binomial(int S, double p) {
    if (S < 2) throw std::invalid_argument("stationary_binomial: S >= 2 required");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("stationary_binomial: p in [0,1]");
    std::vector<double> pi(static_cast<std::size_t>(S), 0.0);
    if (p == 0.0) { pi[0] = 1.0; return pi; }
    if (p == 1.0) { pi[static_cast<std::size_t>(S) - 1] = 1.0; return pi; }
    const double lp = std::log(p), lq = std::log1p(-p);
    const double lgS = std::lgamma(static_cast<double>(S));
    for (int k = 1; k <= S; ++k) {
        const double lw = lgS - std::lgamma(static_cast<double>(k)) -
                          std::lgamma(static_cast<double>(S - k + 1)) +
                          static_cast<double>(k - 1) * lp +
                          static_cast<double>(S - k) * lq;
        pi[static_cast<std::size_t>(k) - 1] = std::exp(lw);
    }
    // Exact mass renormalization against accumulated rounding.
    double sum = 0.0;
    for (double v : pi) sum += v;
    for (double& v : pi) v /= sum;
    return pi;
}

/// Stationary law by numerically solving pi P = pi, sum(pi) = 1.
inline std::vector<double> stationary_solve(int S, double p) {
    const Eigen::MatrixXd P = transition_matrix(S, p);
    Eigen::MatrixXd A = P.transpose() - Eigen::MatrixXd::Identity(S, S);
    A.row(S - 1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(S);
    b(S - 1) = 1.0;
    const Eigen::VectorXd pi = A.fullPivLu().solve(b);
    return {pi.data(), pi.data() + S};
}

/// Transition matrix and stationary law bundled for reporting.
struct ChainAnalysis {
    int S = 0;
    double p = 0.0;
    Eigen::MatrixXd matrix;
    std::vector<double> stationary;
};

inline ChainAnalysis analyze_chain(int S, double p) {
    return ChainAnalysis{S, p, transition_matrix(S, p), stationary_binomial(S, p)};
}

/// Stationary mean squared error of the read-out (p_hat - p)^2.
inline double mse_stationary(int S, double p) {
    if (S < 2) throw std::invalid_argument("mse_stationary: S >= 2 required");
    return p * (1.0 - p) / static_cast<double>(S - 1);
}

// ---------------------------------------------------------------------------
// Mixing diagnostics.
// ---------------------------------------------------------------------------

/// Coupled update driven by one shared uniform: up when u falls in the up
/// region, down when it falls in the down region.  Regions are nested across
/// states, so two coupled copies can only shrink their gap.
inline int coupled_step(int S, double p, int i, double u) noexcept {
    const double d = static_cast<double>(S - 1);
    const double up = (static_cast<double>(S - i) * p) / d;
    const double down_edge = 1.0 - (static_cast<double>(i - 1) * (1.0 - p)) / d;
    if (u <= up) return i + 1;
    if (u > down_edge) return i - 1;
    return i;
}

struct CouplingResult {
    double mean_time = 0.0;
    std::uint64_t max_time = 0;
    std::uint64_t trials = 0;
    bool gap_monotone = true; // coupled gap never grew in any observed step
};

/// Simulates the coupling from the extreme pair (1, S) until the copies meet.
inline CouplingResult coupling_time_sim(int S, double p, std::uint64_t trials,
                                        RandomSource& src) {
    if (S < 2) throw std::invalid_argument("coupling_time_sim: S >= 2 required");
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("coupling_time_sim: p in [0,1]");
    CouplingResult r;
    r.trials = trials;
    double total = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        int x = 1, y = S;
        std::uint64_t steps = 0;
        while (x != y) {
            const double u = src.next_double();
            const int nx = coupled_step(S, p, x, u);
            const int ny = coupled_step(S, p, y, u);
            if (ny - nx > y - x) r.gap_monotone = false;
            x = nx;
            y = ny;
            ++steps;
        }
        total += static_cast<double>(steps);
        r.max_time = std::max(r.max_time, steps);
    }
    r.mean_time = trials ? total / static_cast<double>(trials) : 0.0;
    return r;
}

/// ln(2) (S-1) log2(S-1): no S-state machine mixes faster than this order.
inline double mixing_lower(std::int64_t S) {
    if (S < 2) throw std::invalid_argument("mixing_lower: S >= 2 required");
    return std::numbers::ln2 * static_cast<double>(S - 1) *
           std::log2(static_cast<double>(S - 1));
}

/// 4 S log2 S: worst-case steps until total variation drops below 1/4.
inline double mixing_upper(std::int64_t S) {
    if (S < 2) throw std::invalid_argument("mixing_upper: S >= 2 required");
    return 4.0 * static_cast<double>(S) * std::log2(static_cast<double>(S));
}

/// Steps after which total variation is below delta: ceil(log2(1/delta))
/// doublings of the 1/4-mixing bound.
inline std::uint64_t delta_mixing_bound(std::int64_t S, double delta) {
    if (!(delta > 0.0) || delta >= 1.0)
        throw std::invalid_argument("delta_mixing_bound: delta in (0,1)");
    const double mult = std::ceil(std::log2(1.0 / delta));
    return static_cast<std::uint64_t>(std::ceil(mult * mixing_upper(S)));
}

/// P^t by binary exponentiation.
inline Eigen::MatrixXd matrix_power(Eigen::MatrixXd P, std::uint64_t t) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(P.rows(), P.cols());
    while (t > 0) {
        if (t & 1) acc = acc * P;
        P = P * P;
        t >>= 1;
    }
    return acc;
}

inline double tv_distance(const Eigen::RowVectorXd& a, const std::vector<double>& b) {
    double acc = 0.0;
    for (int i = 0; i < a.size(); ++i)
        acc += std::abs(a(i) - b[static_cast<std::size_t>(i)]);
    return 0.5 * acc;
}

/// Exact TV distance between the chain started at x0 run for t steps and the
/// stationary law.  Dense powering: intended for S <= a few hundred.
inline double tv_from_state(int S, double p, std::uint64_t t, int x0) {
    if (x0 < 1 || x0 > S) throw std::invalid_argument("tv_from_state: x0 in [1,S]");
    const Eigen::MatrixXd Pt = matrix_power(transition_matrix(S, p), t);
    return tv_distance(Pt.row(x0 - 1), stationary_binomial(S, p));
}

/// Worst-case start state TV at time t.
inline double tv_worst(int S, double p, std::uint64_t t) {
    const Eigen::MatrixXd Pt = matrix_power(transition_matrix(S, p), t);
    const std::vector<double> pi = stationary_binomial(S, p);
    double worst = 0.0;
    for (int i = 0; i < S; ++i) worst = std::max(worst, tv_distance(Pt.row(i), pi));
    return worst;
}

/// TV(t) for t = 0..t_max from start state x0, by iterated vector-matrix
/// products (one row, so O(t_max S^2)).
inline std::vector<double> tv_curve(int S, double p, std::uint64_t t_max, int x0) {
    if (x0 < 1 || x0 > S) throw std::invalid_argument("tv_curve: x0 in [1,S]");
    const Eigen::MatrixXd P = transition_matrix(S, p);
    const std::vector<double> pi = stationary_binomial(S, p);
    Eigen::RowVectorXd mu = Eigen::RowVectorXd::Zero(S);
    mu(x0 - 1) = 1.0;
    std::vector<double> out;
    out.reserve(t_max + 1);
    out.push_back(tv_distance(mu, pi));
    for (std::uint64_t t = 1; t <= t_max; ++t) {
        mu = mu * P;
        out.push_back(tv_distance(mu, pi));
    }
    return out;
}

} // namespace fse
