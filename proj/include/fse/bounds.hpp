#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

namespace fse {

namespace detail {

inline void check_bound_inputs(double n, double c, double beta, double delta) {
    if (!(n >= 2.0)) throw std::invalid_argument("bounds: n >= 2 required");
    if (!(c > 0.0)) throw std::invalid_argument("bounds: c > 0 required");
    if (!(beta > 0.0)) throw std::invalid_argument("bounds: beta > 0 required");
    if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bounds: delta in (0,1) required");
}

}  // namespace detail

/// Accuracy margin v_n(alpha) = sqrt(2 c alpha^3 / log2 n) + alpha / log2 n.
inline double v_margin(double n, double c, double alpha) {
    if (!(n >= 2.0)) throw std::invalid_argument("v_margin: n >= 2 required");
    if (!(c > 0.0)) throw std::invalid_argument("v_margin: c > 0 required");
    if (!(alpha >= 0.0)) throw std::invalid_argument("v_margin: alpha >= 0 required");
    const double lg = std::log2(n);
    return std::sqrt(2.0 * c * alpha * alpha * alpha / lg) + alpha / lg;
}

/// Small-n bias envelope
///   psi_c(n) = (e+1) n^{-(c-1)+v(1)}
///            + min{1, 2(e+1) 10^8 n^{-(c-1)/2+v(1/2)}}
///            + n^{-c} 100 (c log2 n + 2) / (1 - n^{-c}/2)^2,
/// evaluated with exponents in log2 domain so large n cannot overflow.
inline double bias_envelope(double n, double c) {
    if (!(n >= 2.0)) throw std::invalid_argument("bias_envelope: n >= 2 required");
    if (!(c > 0.0)) throw std::invalid_argument("bias_envelope: c > 0 required");
    const double lg = std::log2(n);
    const double e1 = std::numbers::e + 1.0;

    const double t1_log = std::log2(e1) + (-(c - 1.0) + v_margin(n, c, 1.0)) * lg;
    const double t1 = std::exp2(t1_log);

    const double t2_log =
        std::log2(2.0 * e1 * 1e8) + (-(c - 1.0) / 2.0 + v_margin(n, c, 0.5)) * lg;
    const double t2 = t2_log >= 0.0 ? 1.0 : std::exp2(t2_log);

    const double ninv_c = std::exp2(-c * lg);
    const double denom = 1.0 - 0.5 * ninv_c;
    const double t3 = ninv_c * 100.0 * (c * lg + 2.0) / (denom * denom);

    return t1 + t2 + t3;
}

/// State budget sufficient for (beta, delta) entropy estimation:
/// n (8 (c log2 n + 2)^4 / (beta^2 delta) + 4 (c log2 n + 2)^2).
inline double upper_bound_states(double n, double c, double beta, double delta) {
    detail::check_bound_inputs(n, c, beta, delta);
    const double m = c * std::log2(n) + 2.0;
    const double m2 = m * m;
    return n * (8.0 * m2 * m2 / (beta * beta * delta) + 4.0 * m2);
}

/// States any (eps, delta)-estimator needs:
/// max{ log2 n / (2 eps), n (1 - 2 sqrt(eps ln 2)) } with the second branch
/// only when eps < 1/(4 ln 2).
inline double lower_bound_states(double n, double eps) {
    if (!(n >= 2.0)) throw std::invalid_argument("lower_bound_states: n >= 2 required");
    if (!(eps > 0.0)) throw std::invalid_argument("lower_bound_states: eps > 0 required");
    double bound = std::log2(n) / (2.0 * eps);
    if (eps < 1.0 / (4.0 * std::numbers::ln2))
        bound = std::max(bound, n * (1.0 - 2.0 * std::sqrt(eps * std::numbers::ln2)));
    return bound;
}

/// End-to-end sample complexity: the bias chain's delta-mixing time
///   k = 4 ceil(log2(1/delta)) G log2 G,  G = 4 (c log2 n + 2)^2 / (beta^2 delta) + 1,
/// per-window length bound m = 4 n^c ln(5 k / delta), total L = k m.
struct SampleComplexity {
    double k = 0.0;
    double m = 0.0;
    double L = 0.0;
};

inline SampleComplexity sample_complexity(double n, double c, double beta, double delta) {
    detail::check_bound_inputs(n, c, beta, delta);
    const double lg = std::log2(n);
    const double G = 4.0 * (c * lg + 2.0) * (c * lg + 2.0) / (beta * beta * delta) + 1.0;
    SampleComplexity s;
    s.k = 4.0 * std::ceil(std::log2(1.0 / delta)) * G * std::log2(G);
    s.m = 4.0 * std::exp2(c * lg) * std::log(5.0 * s.k / delta);
    s.L = s.k * s.m;
    return s;
}

/// State budget sufficient for (beta, delta) MI estimation:
/// n m (288 (c log2 nm + 2)^6 / (beta^2 delta) + 16 (c log2 nm + 2)^4).
inline double mi_upper_bound_states(double n, double m2, double c, double beta, double delta) {
    detail::check_bound_inputs(n, c, beta, delta);
    if (!(m2 >= 2.0)) throw std::invalid_argument("mi_upper_bound_states: m2 >= 2 required");
    const double m = c * std::log2(n * m2) + 2.0;
    const double m4 = m * m * m * m;
    return n * m2 * (288.0 * m4 * m * m / (beta * beta * delta) + 16.0 * m4);
}

/// Order-only MI state lower bound n m / (log2^3 n log2^3 m), emitted with
/// unit constant; cannot gate tests.
inline double mi_lower_bound_order(double n, double m2) {
    if (!(n >= 2.0) || !(m2 >= 2.0))
        throw std::invalid_argument("mi_lower_bound_order: n, m2 >= 2 required");
    const double a = std::log2(n);
    const double b = std::log2(m2);
    return n * m2 / (a * a * a * b * b * b);
}

/// Every closed-form bound for one parameter point, in one bundle.
struct BoundReport {
    double n = 0.0;
    bool has_m2 = false;
    double m2 = 0.0;
    double c = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double eps = 0.0;
    double v1 = 0.0;      ///< v_n(1)
    double v_half = 0.0;  ///< v_n(1/2)
    double psi = 0.0;
    double upper_states = 0.0;
    double lower_states = 0.0;
    double k = 0.0;
    double m = 0.0;
    double L = 0.0;
    double mi_upper_states = 0.0;  ///< only when has_m2
    double mi_lower_order = 0.0;   ///< only when has_m2; order-only
};

inline BoundReport make_bound_report(double n, std::optional<double> m2, double c, double beta,
                                     double delta, double eps) {
    detail::check_bound_inputs(n, c, beta, delta);
    if (!(eps > 0.0)) throw std::invalid_argument("make_bound_report: eps > 0 required");
    BoundReport r;
    r.n = n;
    r.c = c;
    r.beta = beta;
    r.delta = delta;
    r.eps = eps;
    r.v1 = v_margin(n, c, 1.0);
    r.v_half = v_margin(n, c, 0.5);
    r.psi = bias_envelope(n, c);
    r.upper_states = upper_bound_states(n, c, beta, delta);
    r.lower_states = lower_bound_states(n, eps);
    const SampleComplexity s = sample_complexity(n, c, beta, delta);
    r.k = s.k;
    r.m = s.m;
    r.L = s.L;
    if (m2) {
        r.has_m2 = true;
        r.m2 = *m2;
        r.mi_upper_states = mi_upper_bound_states(n, *m2, c, beta, delta);
        r.mi_lower_order = mi_lower_bound_order(n, *m2);
    }
    return r;
}

}  // namespace fse
