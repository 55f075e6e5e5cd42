#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "fse/calibration.hpp"
#include "fse/distribution.hpp"
#include "fse/harness.hpp"
#include "fse/random.hpp"

using namespace fse;

namespace {

Calibration tiny_cal(std::int64_t n, int M, std::int64_t s_bias) {
    Calibration cal;
    cal.variant = Variant::entropy;
    cal.n = n;
    cal.c = 1.5;
    cal.beta = 0.5;
    cal.delta = 0.5;
    cal.B = M - 1;
    cal.M = M;
    cal.mu = flajolet_mu();
    cal.eta = eta_exact_small(M);
    cal.a = 1.0 - (cal.mu + cal.eta) / (2.0 * M);
    cal.s_bias = s_bias;
    return cal;
}

}  // namespace

TEST_CASE("window-length tails stay under their analytic envelopes") {
    const TailTable table = tail_experiment(16, 40000, 71);
    REQUIRE(table.M == 16);
    REQUIRE(table.rows.size() == 6);

    const TailRow& low10 = table.rows[0];
    REQUIRE(low10.lower);
    REQUIRE(low10.param == 10.0);
    REQUIRE(low10.m == 1024);
    REQUIRE(low10.bound == Catch::Approx(std::numbers::e * std::exp2(-12.5)).epsilon(1e-12));

    const TailRow& up3 = table.rows.back();
    REQUIRE_FALSE(up3.lower);
    REQUIRE(up3.m == std::uint64_t{3} << 17);
    REQUIRE(up3.bound == Catch::Approx(5.0 * std::exp(-3.0)).epsilon(1e-12));
    const double b = std::min(up3.bound, 1.0);
    REQUIRE(up3.sigma == Catch::Approx(std::sqrt(b * (1.0 - b) / 40000.0)).epsilon(1e-12));

    for (const TailRow& row : table.rows) {
        REQUIRE(row.trials == 40000);
        REQUIRE(row.empirical ==
                Catch::Approx(static_cast<double>(row.hits) / 40000.0).margin(1e-15));
        REQUIRE(row.pass);
    }
}

TEST_CASE("tail rows outside the valid grid are dropped") {
    // M = 4 leaves only ell = 2 of the lower grid
    const TailTable table = tail_experiment(4, 2000, 72);
    REQUIRE(table.rows.size() == 4);
    REQUIRE(table.rows[0].lower);
    REQUIRE(table.rows[0].param == 2.0);
    REQUIRE_THROWS_AS(tail_experiment(1, 100, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(tail_experiment(8, 0, 0), std::invalid_argument);
}

TEST_CASE("repeated trials concentrate around the window-statistic target") {
    const Calibration cal = tiny_cal(4, 5, 1601);
    const auto dist = DiscreteDistribution::zipf(4, 1.0);
    RandomSource oracle_src(73, 0);
    const double target = theta_oracle(cal, dist, 100000, oracle_src).implied_estimate;

    const TrialReport rep = run_trials(cal, dist, 200, 70000, 0.7, target, 74);
    REQUIRE(rep.trials == 200);
    REQUIRE(rep.estimates.size() == 200);
    REQUIRE(rep.estimates_raw.size() == 200);
    REQUIRE(rep.error_rate ==
            Catch::Approx(static_cast<double>(rep.errors) / 200.0).margin(1e-15));
    REQUIRE(rep.wilson_low <= rep.error_rate);
    REQUIRE(rep.wilson_high >= rep.error_rate);
    REQUIRE(rep.total_samples > 0);
    REQUIRE(rep.wall_seconds >= 0.0);
    REQUIRE(rep.error_rate < 0.35);

    const double raw_mean =
        std::accumulate(rep.estimates_raw.begin(), rep.estimates_raw.end(), 0.0) / 200.0;
    REQUIRE(std::abs(raw_mean - target) < 0.2);
}

TEST_CASE("trials are a function of (seed, stream) only") {
    const Calibration cal = tiny_cal(4, 4, 31);
    const auto dist = DiscreteDistribution::uniform(4);

    const TrialReport a = run_trials(cal, dist, 40, 300, 0.5, 2.0, 75);
    const TrialReport b = run_trials(cal, dist, 40, 300, 0.5, 2.0, 75);
    REQUIRE(a.estimates == b.estimates);

    // permuting the stream list permutes outputs without changing the multiset
    std::vector<std::uint64_t> streams(40);
    std::iota(streams.begin(), streams.end(), 0);
    std::reverse(streams.begin(), streams.end());
    const TrialReport c = run_trials(cal, dist, 40, 300, 0.5, 2.0, 75, 1, &streams);
    std::vector<double> sorted_a = a.estimates;
    std::vector<double> sorted_c = c.estimates;
    std::sort(sorted_a.begin(), sorted_a.end());
    std::sort(sorted_c.begin(), sorted_c.end());
    REQUIRE(sorted_a == sorted_c);
    REQUIRE(a.estimates != c.estimates);  // order moved with the streams

    // thread count is a wall-clock knob, not a semantic one
    const TrialReport d = run_trials(cal, dist, 40, 300, 0.5, 2.0, 75, 4);
    REQUIRE(a.estimates == d.estimates);
    const TrialReport e = run_trials(cal, dist, 3, 300, 0.5, 2.0, 75, 8);
    REQUIRE(e.estimates.size() == 3);

    REQUIRE_THROWS_AS(run_trials(cal, dist, 0, 300, 0.5, 2.0, 75), std::invalid_argument);
    REQUIRE_THROWS_AS(run_trials(cal, dist, 4, 0, 0.5, 2.0, 75), std::invalid_argument);
    REQUIRE_THROWS_AS(run_trials(cal, dist, 4, 300, 0.0, 2.0, 75), std::invalid_argument);
    std::vector<std::uint64_t> short_streams = {1, 2};
    REQUIRE_THROWS_AS(run_trials(cal, dist, 4, 300, 0.5, 2.0, 75, 1, &short_streams),
                      std::invalid_argument);
}

TEST_CASE("thresholded estimator separates uniform from far-from-uniform") {
    // M = 8 keeps the window law's small-count deficit (~0.05 here, ~0.4 at
    // M = 5) well clear of the eps margin around the threshold.
    const Calibration cal = tiny_cal(4, 8, 6401);
    const double eps = 0.4;

    const auto uni = DiscreteDistribution::uniform(4);
    const UniformityReport on_uniform = uniformity_reduction(cal, uni, eps, 40, 70000, 76);
    REQUIRE(on_uniform.threshold == Catch::Approx(2.0 - eps).margin(1e-12));
    REQUIRE(on_uniform.h_true == Catch::Approx(2.0).margin(1e-12));
    REQUIRE(on_uniform.accept_rate > 0.9);

    // TV 0.6 from uniform: past the sqrt(eps ln 2) soundness radius
    const auto far = DiscreteDistribution::two_level(4, 0.25, 0.85);
    REQUIRE(tv_from_uniform(far) == Catch::Approx(0.6).margin(1e-12));
    REQUIRE(tv_from_uniform(far) > std::sqrt(eps * std::numbers::ln2));
    const UniformityReport on_far = uniformity_reduction(cal, far, eps, 40, 70000, 77);
    REQUIRE(on_far.h_true < on_far.threshold);
    REQUIRE(on_far.accept_rate < 0.1);
}

TEST_CASE("total variation from uniform") {
    REQUIRE(tv_from_uniform(DiscreteDistribution::uniform(16)) ==
            Catch::Approx(0.0).margin(1e-15));
    REQUIRE(tv_from_uniform(DiscreteDistribution::two_level(64, 0.25, 0.65)) ==
            Catch::Approx(0.4).margin(1e-12));
    REQUIRE(tv_from_uniform(DiscreteDistribution::point(4, 0)) ==
            Catch::Approx(0.75).margin(1e-12));
}
