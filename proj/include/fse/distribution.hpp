#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fse/random.hpp"

namespace fse {

namespace detail {

/// Walker alias table: O(1) draws from a fixed pmf.
class AliasTable {
public:
    AliasTable() = default;

    explicit AliasTable(const std::vector<double>& pmf) {
        const std::size_t n = pmf.size();
        if (n == 0) throw std::invalid_argument("AliasTable: empty pmf");
        prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        double sum = 0.0;
        for (double p : pmf) {
            if (p < 0.0) throw std::invalid_argument("AliasTable: negative mass");
            sum += p;
        }
        if (!(sum > 0.0)) throw std::invalid_argument("AliasTable: zero mass");
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i)
            scaled[i] = pmf[i] * static_cast<double>(n) / sum;
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i)
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        while (!small.empty() && !large.empty()) {
            const std::uint32_t s = small.back();
            const std::uint32_t l = large.back();
            small.pop_back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (std::uint32_t i : large) prob_[i] = 1.0;
        for (std::uint32_t i : small) prob_[i] = 1.0; // rounding leftovers
    }

    std::size_t size() const noexcept { return prob_.size(); }

    std::size_t sample(RandomSource& src) const {
        // Lemire multiply-shift index; bias below 2^-43 for any table here.
        const auto idx = static_cast<std::size_t>(
            (static_cast<unsigned __int128>(src.next_u64()) * prob_.size()) >> 64);
        return src.next_double() < prob_[idx] ? idx : alias_[idx];
    }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

} // namespace detail

/// Categorical distribution over symbols 0..n-1 with a cumulative table for
/// O(log n) inverse-CDF sampling.
class DiscreteDistribution {
public:
    DiscreteDistribution(std::vector<double> pmf, std::string spec)
        : pmf_(std::move(pmf)), spec_(std::move(spec)) {
        if (pmf_.size() < 1) throw std::invalid_argument("distribution: empty pmf");
        double sum = 0.0;
        for (double p : pmf_) {
            if (!(p >= 0.0)) throw std::invalid_argument("distribution: negative mass");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("distribution: pmf must sum to 1");
        for (double& p : pmf_) p /= sum;
        cdf_.resize(pmf_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < pmf_.size(); ++i) {
            acc += pmf_[i];
            cdf_[i] = acc;
        }
        cdf_.back() = 1.0;
    }

    std::int64_t size() const noexcept { return static_cast<std::int64_t>(pmf_.size()); }
    double prob(std::int64_t i) const { return pmf_.at(static_cast<std::size_t>(i)); }
    const std::vector<double>& pmf() const noexcept { return pmf_; }
    const std::string& spec() const noexcept { return spec_; }

    int sample(RandomSource& src) const {
        const double u = src.next_double();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        return static_cast<int>(std::min<std::size_t>(
            static_cast<std::size_t>(it - cdf_.begin()), pmf_.size() - 1));
    }

    /// Shannon entropy in bits; 0 log 0 := 0.
    double entropy() const {
        double h = 0.0;
        for (double p : pmf_)
            if (p > 0.0) h -= p * std::log2(p);
        return h;
    }

    // --- factories ---------------------------------------------------------

    static DiscreteDistribution uniform(std::int64_t n) {
        check_n(n);
        return {std::vector<double>(static_cast<std::size_t>(n),
                                    1.0 / static_cast<double>(n)),
                "uniform(" + std::to_string(n) + ")"};
    }

    static DiscreteDistribution point(std::int64_t n, std::int64_t i) {
        check_n(n);
        if (i < 0 || i >= n) throw std::invalid_argument("point: atom outside [0,n)");
        std::vector<double> p(static_cast<std::size_t>(n), 0.0);
        p[static_cast<std::size_t>(i)] = 1.0;
        return {std::move(p),
                "point(" + std::to_string(n) + "," + std::to_string(i) + ")"};
    }

    static DiscreteDistribution zipf(std::int64_t n, double s) {
        check_n(n);
        if (!(s >= 0.0)) throw std::invalid_argument("zipf: s >= 0 required");
        std::vector<double> p(static_cast<std::size_t>(n));
        double sum = 0.0;
        for (std::int64_t k = 1; k <= n; ++k) {
            const double w = std::pow(static_cast<double>(k), -s);
            p[static_cast<std::size_t>(k - 1)] = w;
            sum += w;
        }
        for (double& w : p) w /= sum;
        return {std::move(p), "zipf(" + std::to_string(n) + "," + format(s) + ")"};
    }

    /// First round(high_frac*n) symbols share `mass`, the rest share 1-mass.
    static DiscreteDistribution two_level(std::int64_t n, double high_frac,
                                          double mass) {
        check_n(n);
        const auto h = static_cast<std::int64_t>(
            std::llround(high_frac * static_cast<double>(n)));
        if (h < 1 || h >= n)
            throw std::invalid_argument("two_level: high group must be in [1,n)");
        if (!(mass > 0.0) || mass >= 1.0)
            throw std::invalid_argument("two_level: mass in (0,1) required");
        std::vector<double> p(static_cast<std::size_t>(n));
        const double hi = mass / static_cast<double>(h);
        const double lo = (1.0 - mass) / static_cast<double>(n - h);
        for (std::int64_t i = 0; i < n; ++i)
            p[static_cast<std::size_t>(i)] = i < h ? hi : lo;
        return {std::move(p), "two_level(" + std::to_string(n) + "," +
                                  format(high_frac) + "," + format(mass) + ")"};
    }

    /// Uniform draw from the simplex (Dirichlet(1,..,1)) pinned to `seed`.
    static DiscreteDistribution dirichlet_random(std::int64_t n, std::uint64_t seed) {
        check_n(n);
        RandomSource src(seed, 0x64697269u); // dedicated derivation stream
        std::vector<double> p(static_cast<std::size_t>(n));
        double sum = 0.0;
        for (auto& w : p) {
            w = -std::log(src.next_double_nonzero());
            sum += w;
        }
        for (double& w : p) w /= sum;
        return {std::move(p), "dirichlet_random(" + std::to_string(n) + "," +
                                  std::to_string(seed) + ")"};
    }

private:
    static void check_n(std::int64_t n) {
        if (n < 1 || n > (std::int64_t{1} << 31))
            throw std::invalid_argument("distribution: n in [1, 2^31] required");
    }
    static std::string format(double v) {
        std::string s = std::to_string(v);
        while (s.size() > 1 && s.back() == '0') s.pop_back();
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }

    std::vector<double> pmf_;
    std::vector<double> cdf_;
    std::string spec_;
};

inline double entropy_exact(const DiscreteDistribution& d) { return d.entropy(); }

/// Joint distribution over [n] x [m2], row-major pmf, marginals cached.
class JointDistribution {
public:
    JointDistribution(std::int64_t n, std::int64_t m2, std::vector<double> joint,
                      std::string spec)
        : n_(n), m2_(m2), joint_(std::move(joint)), spec_(std::move(spec)) {
        if (n < 1 || m2 < 1) throw std::invalid_argument("joint: n, m2 >= 1");
        if (joint_.size() != static_cast<std::size_t>(n * m2))
            throw std::invalid_argument("joint: pmf size mismatch");
        double sum = 0.0;
        for (double p : joint_) {
            if (!(p >= 0.0)) throw std::invalid_argument("joint: negative mass");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("joint: pmf must sum to 1");
        for (double& p : joint_) p /= sum;
        px_.assign(static_cast<std::size_t>(n), 0.0);
        py_.assign(static_cast<std::size_t>(m2), 0.0);
        for (std::int64_t x = 0; x < n; ++x)
            for (std::int64_t y = 0; y < m2; ++y) {
                px_[static_cast<std::size_t>(x)] += at(x, y);
                py_[static_cast<std::size_t>(y)] += at(x, y);
            }
        cdf_.resize(joint_.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < joint_.size(); ++i) {
            acc += joint_[i];
            cdf_[i] = acc;
        }
        cdf_.back() = 1.0;
    }

    std::int64_t n() const noexcept { return n_; }
    std::int64_t m2() const noexcept { return m2_; }
    const std::string& spec() const noexcept { return spec_; }

    double at(std::int64_t x, std::int64_t y) const {
        if (x < 0 || x >= n_ || y < 0 || y >= m2_)
            throw std::out_of_range("joint: pair outside [n] x [m2]");
        return joint_[static_cast<std::size_t>(x * m2_ + y)];
    }
    double marginal_x(std::int64_t x) const { return px_.at(static_cast<std::size_t>(x)); }
    double marginal_y(std::int64_t y) const { return py_.at(static_cast<std::size_t>(y)); }

    std::pair<int, int> sample(RandomSource& src) const {
        const double u = src.next_double();
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        const auto idx = std::min<std::size_t>(
            static_cast<std::size_t>(it - cdf_.begin()), joint_.size() - 1);
        return {static_cast<int>(idx / static_cast<std::size_t>(m2_)),
                static_cast<int>(idx % static_cast<std::size_t>(m2_))};
    }

    /// Mutual information in bits: sum p(x,y) log2( p(x,y) / (p(x)p(y)) ).
    double mutual_information() const {
        double i = 0.0;
        for (std::int64_t x = 0; x < n_; ++x)
            for (std::int64_t y = 0; y < m2_; ++y) {
                const double pxy = at(x, y);
                if (pxy > 0.0)
                    i += pxy * std::log2(pxy / (marginal_x(x) * marginal_y(y)));
            }
        return std::max(0.0, i);
    }

    // --- factories ---------------------------------------------------------

    static JointDistribution product(const DiscreteDistribution& dx,
                                     const DiscreteDistribution& dy) {
        std::vector<double> joint(
            static_cast<std::size_t>(dx.size() * dy.size()));
        for (std::int64_t x = 0; x < dx.size(); ++x)
            for (std::int64_t y = 0; y < dy.size(); ++y)
                joint[static_cast<std::size_t>(x * dy.size() + y)] =
                    dx.prob(x) * dy.prob(y);
        return {dx.size(), dy.size(), std::move(joint),
                "product(" + dx.spec() + "," + dy.spec() + ")"};
    }

    /// X uniform on [n], Y = X.
    static JointDistribution identity(std::int64_t n) {
        if (n < 1) throw std::invalid_argument("identity: n >= 1");
        std::vector<double> joint(static_cast<std::size_t>(n * n), 0.0);
        for (std::int64_t x = 0; x < n; ++x)
            joint[static_cast<std::size_t>(x * n + x)] = 1.0 / static_cast<double>(n);
        return {n, n, std::move(joint), "identity(" + std::to_string(n) + ")"};
    }

    /// Binary symmetric channel: X ~ Bern(1/2), Y = X xor Bern(q).
    static JointDistribution bsc(double q) {
        if (!(q >= 0.0) || q > 1.0) throw std::invalid_argument("bsc: q in [0,1]");
        std::vector<double> joint = {(1.0 - q) / 2.0, q / 2.0, q / 2.0,
                                     (1.0 - q) / 2.0};
        std::string s = std::to_string(q);
        return {2, 2, std::move(joint), "bsc(" + s + ")"};
    }

private:
    std::int64_t n_, m2_;
    std::vector<double> joint_;
    std::vector<double> px_, py_, cdf_;
    std::string spec_;
};

inline double mi_exact(const JointDistribution& j) { return j.mutual_information(); }

// ---------------------------------------------------------------------------
// CLI spec parsing: name(arg, arg, ...), with nesting for joints.
// ---------------------------------------------------------------------------

namespace detail {

inline std::string strip(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

struct SpecCall {
    std::string name;
    std::vector<std::string> args;
};

inline SpecCall parse_call(const std::string& text) {
    const std::string t = strip(text);
    const auto open = t.find('(');
    if (open == std::string::npos || t.back() != ')')
        throw std::invalid_argument("spec '" + text + "': expected name(args)");
    SpecCall call;
    call.name = strip(t.substr(0, open));
    const std::string body = t.substr(open + 1, t.size() - open - 2);
    std::string cur;
    int depth = 0;
    for (char ch : body) {
        if (ch == '(') ++depth;
        if (ch == ')') --depth;
        if (ch == ',' && depth == 0) {
            call.args.push_back(strip(cur));
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!strip(cur).empty()) call.args.push_back(strip(cur));
    if (depth != 0) throw std::invalid_argument("spec '" + text + "': unbalanced parens");
    return call;
}

inline double arg_real(const SpecCall& c, std::size_t i) {
    if (i >= c.args.size())
        throw std::invalid_argument("spec '" + c.name + "': missing argument");
    return std::stod(c.args[i]);
}

inline std::int64_t arg_int(const SpecCall& c, std::size_t i) {
    if (i >= c.args.size())
        throw std::invalid_argument("spec '" + c.name + "': missing argument");
    return std::stoll(c.args[i]);
}

} // namespace detail

/// Parses uniform(n) | point(n,i) | zipf(n,s) | two_level(n,high_frac,mass) |
/// dirichlet_random(n,seed).
inline DiscreteDistribution make_distribution(const std::string& spec) {
    const auto call = detail::parse_call(spec);
    if (call.name == "uniform")
        return DiscreteDistribution::uniform(detail::arg_int(call, 0));
    if (call.name == "point")
        return DiscreteDistribution::point(detail::arg_int(call, 0),
                                           detail::arg_int(call, 1));
    if (call.name == "zipf")
        return DiscreteDistribution::zipf(detail::arg_int(call, 0),
                                          detail::arg_real(call, 1));
    if (call.name == "two_level")
        return DiscreteDistribution::two_level(detail::arg_int(call, 0),
                                               detail::arg_real(call, 1),
                                               detail::arg_real(call, 2));
    if (call.name == "dirichlet_random")
        return DiscreteDistribution::dirichlet_random(
            detail::arg_int(call, 0),
            static_cast<std::uint64_t>(detail::arg_int(call, 1)));
    throw std::invalid_argument("unknown distribution spec '" + spec + "'");
}

/// Parses product(<dist>,<dist>) | identity(n) | bsc(q).
inline JointDistribution make_joint(const std::string& spec) {
    const auto call = detail::parse_call(spec);
    if (call.name == "product") {
        if (call.args.size() != 2)
            throw std::invalid_argument("product: expected two distribution specs");
        return JointDistribution::product(make_distribution(call.args[0]),
                                          make_distribution(call.args[1]));
    }
    if (call.name == "identity")
        return JointDistribution::identity(detail::arg_int(call, 0));
    if (call.name == "bsc") return JointDistribution::bsc(detail::arg_real(call, 0));
    throw std::invalid_argument("unknown joint spec '" + spec + "'");
}

} // namespace fse
