// Command-line front end: every estimator, oracle and bound in the library,
// deterministic given flags + seed.  Reports are single JSON documents,
// streaming outputs are JSON lines; --format csv mirrors either as CSV with
// the resolved config echoed on a leading '#' line.
#include <algorithm>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fse/bias_fsm.hpp"
#include "fse/bounds.hpp"
#include "fse/calibration.hpp"
#include "fse/distribution.hpp"
#include "fse/entropy_machine.hpp"
#include "fse/harness.hpp"
#include "fse/mi_machine.hpp"
#include "fse/morris.hpp"
#include "fse/random.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kOracleStream = 0x6f7261636c650000ull;  // far above trial ids
constexpr std::uint64_t kRunStream = 1;

json calibration_json(const fse::Calibration& cal) {
    json j;
    j["variant"] = fse::to_string(cal.variant);
    j["n"] = cal.n;
    if (cal.variant == fse::Variant::mutual_information) j["m2"] = cal.m2;
    j["c"] = cal.c;
    j["beta"] = cal.beta;
    j["delta"] = cal.delta;
    j["target"] = cal.target;
    j["B"] = cal.B;
    j["M"] = cal.M;
    j["mu"] = cal.mu;
    j["eta"] = cal.eta;
    j["a"] = cal.a;
    j["s_bias"] = cal.s_bias;
    j["alpha_eta"] = cal.alpha_eta;
    j["delta_eta"] = cal.delta_eta;
    j["seed"] = cal.seed;
    return j;
}

bool is_csv(const std::string& format) {
    if (format == "csv") return true;
    if (format == "json") return false;
    throw std::invalid_argument("--format must be json or csv");
}

void emit_config(const json& cfg, bool csv) {
    if (csv)
        std::cout << "# " << cfg.dump() << "\n";
    else
        std::cout << cfg.dump() << "\n";
}

/// Single-document report: {config, <name>: body}; CSV mirrors the flattened
/// key/value pairs.
void emit_report(const json& cfg, const std::string& name, const json& body, bool csv) {
    json doc;
    doc["config"] = cfg;
    doc[name] = body;
    if (!csv) {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    emit_config(cfg, true);
    std::cout << "key,value\n";
    const json flat = json(doc[name]).flatten();
    for (const auto& [key, value] : flat.items())
        std::cout << name << key << "," << value.dump() << "\n";
}

std::string num(double v) { return json(v).dump(); }

// ---------------------------------------------------------------------------

struct CalibrateArgs {
    std::int64_t n = 0;
    double c = 0.0, beta = 0.0, delta = 0.0;
    bool mi = false;
    std::int64_t m2 = 0;
    std::uint64_t seed = 0;
    std::string format = "json";
};

int cmd_calibrate(const CalibrateArgs& a) {
    const bool csv = is_csv(a.format);
    if (a.mi && a.m2 < 2)
        throw std::invalid_argument("calibrate: --mi requires --m2 >= 2");
    const fse::Calibration cal =
        a.mi ? fse::calibrate_mi(a.n, a.m2, a.c, a.beta, a.delta, a.seed)
             : fse::calibrate(a.n, a.c, a.beta, a.delta, a.seed);
    json cfg;
    cfg["command"] = "calibrate";
    cfg["n"] = a.n;
    if (a.mi) cfg["m2"] = a.m2;
    cfg["c"] = a.c;
    cfg["beta"] = a.beta;
    cfg["delta"] = a.delta;
    cfg["seed"] = a.seed;
    cfg["format"] = a.format;
    emit_report(cfg, "calibration", calibration_json(cal), csv);
    return 0;
}

// ---------------------------------------------------------------------------

struct EstimateArgs {
    std::string dist;
    std::int64_t n = 0;
    double c = 0.0, beta = 0.0, delta = 0.0;
    std::uint64_t increments = 0;
    std::uint64_t samples = 0;
    std::uint64_t seed = 0;
    bool faithful = false;
    std::string format = "json";
};

void emit_estimate_row(std::uint64_t t, std::uint64_t k, double raw, double clamped,
                       std::uint64_t state_index, bool csv) {
    if (csv) {
        std::cout << t << "," << k << "," << num(raw) << "," << num(clamped) << ","
                  << state_index << "\n";
        return;
    }
    json row;
    row["t"] = t;
    row["k"] = k;
    row["estimate_raw"] = raw;
    row["estimate_clamped"] = clamped;
    row["state_index"] = state_index;
    std::cout << row.dump() << "\n";
}

int cmd_estimate(const EstimateArgs& a) {
    const bool csv = is_csv(a.format);
    if ((a.increments == 0) == (a.samples == 0))
        throw std::invalid_argument("estimate: exactly one of --increments/--samples required");
    const fse::Calibration cal = fse::calibrate(a.n, a.c, a.beta, a.delta, a.seed);
    const fse::DiscreteDistribution dist = fse::make_distribution(a.dist);
    if (dist.size() != a.n)
        throw std::invalid_argument("estimate: distribution support != n");

    json cfg;
    cfg["command"] = "estimate";
    cfg["dist"] = dist.spec();
    cfg["n"] = a.n;
    cfg["c"] = a.c;
    cfg["beta"] = a.beta;
    cfg["delta"] = a.delta;
    if (a.increments) cfg["increments"] = a.increments;
    if (a.samples) cfg["samples"] = a.samples;
    cfg["seed"] = a.seed;
    cfg["faithful"] = a.faithful;
    cfg["format"] = a.format;
    cfg["calibration"] = calibration_json(cal);
    emit_config(cfg, csv);
    if (csv) std::cout << "t,k,estimate_raw,estimate_clamped,state_index\n";

    fse::RandomSource src = fse::split(a.seed, kRunStream);
    fse::EntropyMachine machine(cal);
    const bool by_increments = a.increments > 0;
    const std::uint64_t budget = by_increments ? a.increments : a.samples;
    std::uint64_t next_mark = 1;
    std::uint64_t last_emitted = ~std::uint64_t{0};
    const auto progress = [&]() { return by_increments ? machine.increments() : machine.samples(); };
    const auto emit_state = [&]() {
        emit_estimate_row(machine.samples(), machine.increments(), machine.estimate_raw(),
                          machine.estimate(), machine.state_index(), csv);
        last_emitted = progress();
    };

    if (a.faithful) {
        while (progress() < budget) {
            machine.feed(dist.sample(src), src);
            if (progress() >= next_mark) {
                emit_state();
                while (next_mark <= progress()) next_mark *= 2;
            }
        }
    } else {
        const fse::EntropyWindowEngine engine(cal, dist);
        while (progress() < budget) {
            const auto w = engine.sample_window(src);
            machine.apply_window(w.length, w.counter, src);
            if (progress() >= next_mark) {
                emit_state();
                while (next_mark <= progress()) next_mark *= 2;
            }
        }
    }
    if (last_emitted != progress()) emit_state();
    return 0;
}

// ---------------------------------------------------------------------------

struct EstimateMIArgs {
    std::string joint;
    std::int64_t n = 0, m2 = 0;
    double c = 0.0, beta = 0.0, delta = 0.0;
    std::uint64_t increments = 0;
    std::uint64_t seed = 0;
    bool faithful = false;
    std::string format = "json";
};

int cmd_estimate_mi(const EstimateMIArgs& a) {
    const bool csv = is_csv(a.format);
    const fse::Calibration cal = fse::calibrate_mi(a.n, a.m2, a.c, a.beta, a.delta, a.seed);
    const fse::JointDistribution joint = fse::make_joint(a.joint);
    if (joint.n() != a.n || joint.m2() != a.m2)
        throw std::invalid_argument("estimate-mi: joint dimensions != (n, m2)");

    json cfg;
    cfg["command"] = "estimate-mi";
    cfg["joint"] = joint.spec();
    cfg["n"] = a.n;
    cfg["m2"] = a.m2;
    cfg["c"] = a.c;
    cfg["beta"] = a.beta;
    cfg["delta"] = a.delta;
    cfg["increments"] = a.increments;
    cfg["seed"] = a.seed;
    cfg["faithful"] = a.faithful;
    cfg["format"] = a.format;
    cfg["calibration"] = calibration_json(cal);
    emit_config(cfg, csv);
    if (csv) std::cout << "t,k,estimate_raw,estimate_clamped,state_index\n";

    fse::RandomSource src = fse::split(a.seed, kRunStream);
    fse::MIMachine machine(cal);
    std::uint64_t next_mark = 1;
    std::uint64_t last_emitted = ~std::uint64_t{0};
    const auto emit_state = [&]() {
        emit_estimate_row(machine.samples(), machine.increments(), machine.estimate_raw(),
                          machine.estimate(), machine.state_index(), csv);
        last_emitted = machine.increments();
    };
    if (a.faithful) {
        while (machine.increments() < a.increments) {
            const auto [x, y] = joint.sample(src);
            machine.feed(x, y, src);
            if (machine.increments() >= next_mark) {
                emit_state();
                while (next_mark <= machine.increments()) next_mark *= 2;
            }
        }
    } else {
        const fse::MIWindowEngine engine(cal, joint);
        while (machine.increments() < a.increments) {
            const auto w = engine.sample_window(src);
            machine.apply_window(w.length, w.counter_x, w.counter_y, w.counter_xy, src);
            if (machine.increments() >= next_mark) {
                emit_state();
                while (next_mark <= machine.increments()) next_mark *= 2;
            }
        }
    }
    if (last_emitted != machine.increments()) emit_state();
    return 0;
}

// ---------------------------------------------------------------------------

struct BoundsArgs {
    double n = 0.0;
    std::optional<double> m2;
    double c = 1.5, beta = 0.1, delta = 0.1, eps = 0.1;
    std::string format = "json";
};

int cmd_bounds(const BoundsArgs& a) {
    const bool csv = is_csv(a.format);
    const fse::BoundReport r = fse::make_bound_report(a.n, a.m2, a.c, a.beta, a.delta, a.eps);
    json cfg;
    cfg["command"] = "bounds";
    cfg["n"] = a.n;
    if (a.m2) cfg["m2"] = *a.m2;
    cfg["c"] = a.c;
    cfg["beta"] = a.beta;
    cfg["delta"] = a.delta;
    cfg["eps"] = a.eps;
    cfg["format"] = a.format;

    json body;
    body["v1"] = r.v1;
    body["v_half"] = r.v_half;
    body["psi"] = r.psi;
    body["upper_states"] = r.upper_states;
    body["lower_states"] = r.lower_states;
    body["k"] = r.k;
    body["m"] = r.m;
    body["L"] = r.L;
    if (r.has_m2) {
        body["mi_upper_states"] = r.mi_upper_states;
        body["mi_lower_order"] = r.mi_lower_order;
    }
    emit_report(cfg, "bounds", body, csv);
    return 0;
}

// ---------------------------------------------------------------------------

struct BenchTailsArgs {
    int M = 16;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    std::string format = "csv";
};

int cmd_bench_tails(const BenchTailsArgs& a) {
    const bool csv = is_csv(a.format);
    const fse::TailTable table = fse::tail_experiment(a.M, a.trials, a.seed);
    json cfg;
    cfg["command"] = "bench-tails";
    cfg["M"] = a.M;
    cfg["trials"] = a.trials;
    cfg["seed"] = a.seed;
    cfg["format"] = a.format;
    emit_config(cfg, csv);
    if (csv) std::cout << "side,param,m,hits,empirical,bound,sigma,pass\n";
    for (const fse::TailRow& row : table.rows) {
        if (csv) {
            std::cout << (row.lower ? "lower" : "upper") << "," << num(row.param) << ","
                      << row.m << "," << row.hits << "," << num(row.empirical) << ","
                      << num(row.bound) << "," << num(row.sigma) << ","
                      << (row.pass ? "true" : "false") << "\n";
            continue;
        }
        json j;
        j["side"] = row.lower ? "lower" : "upper";
        j["param"] = row.param;
        j["m"] = row.m;
        j["hits"] = row.hits;
        j["empirical"] = row.empirical;
        j["bound"] = row.bound;
        j["sigma"] = row.sigma;
        j["pass"] = row.pass;
        std::cout << j.dump() << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct BiasMixArgs {
    std::int64_t states = 0;
    double p = 0.5;
    std::uint64_t trials = 10000;
    int t_max = 0;  // 0: use the 4 S log2 S envelope
    std::uint64_t seed = 0;
    std::string format = "csv";
};

int cmd_bias_mix(const BiasMixArgs& a) {
    const bool csv = is_csv(a.format);
    if (a.states < 2 || a.states > 256)
        throw std::invalid_argument("bias-mix: --states in [2, 256] required (exact TV uses matrix powers)");
    const int S = static_cast<int>(a.states);
    const int t_max =
        a.t_max > 0 ? a.t_max : static_cast<int>(fse::mixing_upper(a.states));

    fse::RandomSource src(a.seed, 0);
    const fse::CouplingResult coupling = fse::coupling_time_sim(S, a.p, a.trials, src);

    json cfg;
    cfg["command"] = "bias-mix";
    cfg["states"] = a.states;
    cfg["p"] = a.p;
    cfg["trials"] = a.trials;
    cfg["t_max"] = t_max;
    cfg["seed"] = a.seed;
    cfg["format"] = a.format;
    cfg["mixing_lower"] = fse::mixing_lower(a.states);
    cfg["mixing_upper"] = fse::mixing_upper(a.states);
    cfg["delta_mixing_bound_quarter"] = fse::delta_mixing_bound(a.states, 0.25);
    cfg["coupling_mean"] = coupling.mean_time;
    cfg["coupling_max"] = coupling.max_time;
    cfg["coupling_gap_monotone"] = coupling.gap_monotone;
    emit_config(cfg, csv);

    // worst start is an endpoint under the monotone coupling
    const std::vector<double> from_low = fse::tv_curve(S, a.p, t_max, 1);
    const std::vector<double> from_high = fse::tv_curve(S, a.p, t_max, S);
    if (csv) std::cout << "t,tv\n";
    for (int t = 1; t <= t_max; ++t) {
        const double tv = std::max(from_low[static_cast<std::size_t>(t)],
                                   from_high[static_cast<std::size_t>(t)]);
        if (csv) {
            std::cout << t << "," << num(tv) << "\n";
        } else {
            json j;
            j["t"] = t;
            j["tv"] = tv;
            std::cout << j.dump() << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct BenchMixingArgs {
    std::int64_t states = 0;
    double p = 0.5;
    int t_max = 0;
    std::uint64_t chains = 20000;
    std::uint64_t seed = 0;
    std::string format = "csv";
};

int cmd_bench_mixing(const BenchMixingArgs& a) {
    const bool csv = is_csv(a.format);
    if (a.states < 2 || a.states > 256)
        throw std::invalid_argument("bench-mixing: --states in [2, 256] required");
    if (a.chains == 0) throw std::invalid_argument("bench-mixing: --chains >= 1 required");
    const int S = static_cast<int>(a.states);
    const int t_max =
        a.t_max > 0 ? a.t_max : static_cast<int>(fse::mixing_upper(a.states));

    json cfg;
    cfg["command"] = "bench-mixing";
    cfg["states"] = a.states;
    cfg["p"] = a.p;
    cfg["t_max"] = t_max;
    cfg["chains"] = a.chains;
    cfg["seed"] = a.seed;
    cfg["format"] = a.format;
    emit_config(cfg, csv);

    const std::vector<double> exact = fse::tv_curve(S, a.p, t_max, S);
    const std::vector<double> pi = fse::stationary_binomial(S, a.p);
    std::vector<int> checkpoints;
    for (int t = 1; t <= t_max; t *= 2) checkpoints.push_back(t);
    if (checkpoints.back() != t_max) checkpoints.push_back(t_max);

    std::vector<fse::BiasMachine> chains(a.chains, fse::bias_machine(a.states));
    for (auto& m : chains) m.state = a.states;  // worst start: top endpoint
    fse::RandomSource src(a.seed, 0);
    if (csv) std::cout << "t,tv_exact,tv_empirical\n";
    int t = 0;
    for (const int mark : checkpoints) {
        for (; t < mark; ++t)
            for (auto& m : chains) fse::bias_step(m, src.bernoulli(a.p), src);
        std::vector<double> hist(static_cast<std::size_t>(a.states), 0.0);
        for (const auto& m : chains) hist[static_cast<std::size_t>(m.state - 1)] += 1.0;
        double tv = 0.0;
        for (std::size_t i = 0; i < hist.size(); ++i)
            tv += std::abs(hist[i] / static_cast<double>(a.chains) - pi[i]);
        tv *= 0.5;
        if (csv) {
            std::cout << mark << "," << num(exact[static_cast<std::size_t>(mark)]) << ","
                      << num(tv) << "\n";
        } else {
            json j;
            j["t"] = mark;
            j["tv_exact"] = exact[static_cast<std::size_t>(mark)];
            j["tv_empirical"] = tv;
            std::cout << j.dump() << "\n";
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------

struct TrialsArgs {
    std::string dist;
    std::int64_t n = 0;
    double c = 0.0, beta = 0.0, delta = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t increments = 0;
    double eps = 0.0;
    std::optional<double> target;
    std::uint64_t oracle_windows = 0;  // 0: 100x the per-trial window count
    std::uint64_t seed = 0;
    int threads = 1;
    std::string format = "json";
};

int cmd_trials(const TrialsArgs& a) {
    const bool csv = is_csv(a.format);
    const fse::Calibration cal = fse::calibrate(a.n, a.c, a.beta, a.delta, a.seed);
    const fse::DiscreteDistribution dist = fse::make_distribution(a.dist);

    double target = 0.0;
    std::uint64_t oracle_windows = 0;
    if (a.target) {
        target = *a.target;
    } else {
        oracle_windows = a.oracle_windows > 0 ? a.oracle_windows : 100 * a.increments;
        fse::RandomSource oracle_src = fse::split(a.seed, kOracleStream);
        target = fse::theta_oracle(cal, dist, oracle_windows, oracle_src).implied_estimate;
    }

    json cfg;
    cfg["command"] = "trials";
    cfg["dist"] = dist.spec();
    cfg["n"] = a.n;
    cfg["c"] = a.c;
    cfg["beta"] = a.beta;
    cfg["delta"] = a.delta;
    cfg["trials"] = a.trials;
    cfg["increments"] = a.increments;
    cfg["eps"] = a.eps;
    cfg["target"] = target;
    if (oracle_windows) cfg["oracle_windows"] = oracle_windows;
    cfg["seed"] = a.seed;
    cfg["threads"] = a.threads;
    cfg["format"] = a.format;
    cfg["calibration"] = calibration_json(cal);

    const fse::TrialReport rep =
        fse::run_trials(cal, dist, a.trials, a.increments, a.eps, target, a.seed, a.threads);
    json body;
    body["trials"] = rep.trials;
    body["k_increments"] = rep.k_increments;
    body["eps"] = rep.eps;
    body["target"] = rep.target;
    body["errors"] = rep.errors;
    body["error_rate"] = rep.error_rate;
    body["wilson_low"] = rep.wilson_low;
    body["wilson_high"] = rep.wilson_high;
    body["mean_error"] = rep.mean_error;
    body["stddev_error"] = rep.stddev_error;
    body["total_samples"] = rep.total_samples;
    body["total_saturation_resets"] = rep.total_saturation_resets;
    body["estimates"] = rep.estimates;  // wall clock deliberately omitted
    emit_report(cfg, "trials", body, csv);
    return 0;
}

// ---------------------------------------------------------------------------

struct UniformityArgs {
    std::string dist;
    std::int64_t n = 0;
    double c = 0.0, beta = 0.0, delta = 0.0;
    double eps = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t increments = 0;
    std::uint64_t seed = 0;
    int threads = 1;
    std::string format = "json";
};

int cmd_uniformity(const UniformityArgs& a) {
    const bool csv = is_csv(a.format);
    const fse::Calibration cal = fse::calibrate(a.n, a.c, a.beta, a.delta, a.seed);
    const fse::DiscreteDistribution dist = fse::make_distribution(a.dist);
    const fse::UniformityReport rep =
        fse::uniformity_reduction(cal, dist, a.eps, a.trials, a.increments, a.seed, a.threads);

    json cfg;
    cfg["command"] = "uniformity";
    cfg["dist"] = dist.spec();
    cfg["n"] = a.n;
    cfg["c"] = a.c;
    cfg["beta"] = a.beta;
    cfg["delta"] = a.delta;
    cfg["eps"] = a.eps;
    cfg["trials"] = a.trials;
    cfg["increments"] = a.increments;
    cfg["seed"] = a.seed;
    cfg["threads"] = a.threads;
    cfg["format"] = a.format;
    cfg["calibration"] = calibration_json(cal);

    json body;
    body["trials"] = rep.trials;
    body["accepts"] = rep.accepts;
    body["accept_rate"] = rep.accept_rate;
    body["wilson_low"] = rep.wilson_low;
    body["wilson_high"] = rep.wilson_high;
    body["threshold"] = rep.threshold;
    body["eps"] = rep.eps;
    body["h_true"] = rep.h_true;
    body["tv_from_uniform"] = fse::tv_from_uniform(dist);
    emit_report(cfg, "uniformity", body, csv);
    return 0;
}

// ---------------------------------------------------------------------------

struct MorrisLawArgs {
    std::uint64_t m = 0;
    int cap = 0;
    int top = 0;
    std::string format = "csv";
};

int cmd_morris_law(const MorrisLawArgs& a) {
    const bool csv = is_csv(a.format);
    int top = a.cap;
    if (a.cap == 0) {
        top = a.top;
        if (top == 0) {
            // generous truncation: state stays near log2 m + mu
            top = 16;
            while ((std::uint64_t{1} << std::min(top, 62)) < a.m + 2) top += 8;
            top += 16;
        }
    }
    const fse::MorrisLaw law = fse::morris_law(a.m, top, a.cap > 0);

    json cfg;
    cfg["command"] = "morris-law";
    cfg["m"] = a.m;
    cfg["cap"] = a.cap;
    cfg["top"] = top;
    cfg["format"] = a.format;
    cfg["expected_state"] = fse::expected_state(a.m);
    cfg["would_saturate"] = law.would_saturate;
    emit_config(cfg, csv);
    if (csv) std::cout << "state,probability\n";
    for (std::size_t i = 0; i < law.probs.size(); ++i) {
        if (csv) {
            std::cout << (i + 1) << "," << num(law.probs[i]) << "\n";
        } else {
            json j;
            j["state"] = i + 1;
            j["probability"] = law.probs[i];
            std::cout << j.dump() << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-state streaming entropy / mutual-information estimation toolkit"};
    app.require_subcommand(1);

    CalibrateArgs cal_args;
    CLI::App* cal_cmd = app.add_subcommand("calibrate", "derive machine constants from (n, c, beta, delta)");
    cal_cmd->add_option("--n", cal_args.n, "alphabet size n")->required();
    cal_cmd->add_option("--c", cal_args.c, "oversampling exponent c (window target n^c)")->required();
    cal_cmd->add_option("--beta", cal_args.beta, "additive accuracy beta")->required();
    cal_cmd->add_option("--delta", cal_args.delta, "failure probability delta")->required();
    cal_cmd->add_flag("--mi", cal_args.mi, "calibrate the pair (mutual-information) machine");
    cal_cmd->add_option("--m2", cal_args.m2, "second alphabet size m2 (with --mi)");
    cal_cmd->add_option("--seed", cal_args.seed, "RNG seed");
    cal_cmd->add_option("--format", cal_args.format, "json|csv");

    EstimateArgs est_args;
    CLI::App* est_cmd = app.add_subcommand("estimate", "stream an entropy estimate for a synthetic distribution");
    est_cmd->add_option("--dist", est_args.dist, "distribution spec, e.g. uniform(64) or zipf(100,1.0)")->required();
    est_cmd->add_option("--n", est_args.n, "alphabet size n")->required();
    est_cmd->add_option("--c", est_args.c, "oversampling exponent c")->required();
    est_cmd->add_option("--beta", est_args.beta, "additive accuracy beta")->required();
    est_cmd->add_option("--delta", est_args.delta, "failure probability delta")->required();
    est_cmd->add_option("--increments", est_args.increments, "budget in bias-chain increments");
    est_cmd->add_option("--samples", est_args.samples, "budget in stream samples");
    est_cmd->add_option("--seed", est_args.seed, "RNG seed");
    est_cmd->add_flag("--faithful", est_args.faithful, "symbol-by-symbol simulation instead of whole-window sampling");
    est_cmd->add_option("--format", est_args.format, "json|csv");

    EstimateMIArgs mi_args;
    CLI::App* mi_cmd = app.add_subcommand("estimate-mi", "stream a mutual-information estimate for a synthetic joint");
    mi_cmd->add_option("--joint", mi_args.joint, "joint spec, e.g. identity(16) or product(uniform(4),zipf(3,1.0))")->required();
    mi_cmd->add_option("--n", mi_args.n, "first alphabet size n")->required();
    mi_cmd->add_option("--m2", mi_args.m2, "second alphabet size m2")->required();
    mi_cmd->add_option("--c", mi_args.c, "oversampling exponent c")->required();
    mi_cmd->add_option("--beta", mi_args.beta, "additive accuracy beta")->required();
    mi_cmd->add_option("--delta", mi_args.delta, "failure probability delta")->required();
    mi_cmd->add_option("--increments", mi_args.increments, "budget in bias-chain increments")->required();
    mi_cmd->add_option("--seed", mi_args.seed, "RNG seed");
    mi_cmd->add_flag("--faithful", mi_args.faithful, "pair-by-pair simulation instead of whole-window sampling");
    mi_cmd->add_option("--format", mi_args.format, "json|csv");

    BoundsArgs bounds_args;
    double bounds_m2 = 0.0;
    CLI::App* bounds_cmd = app.add_subcommand("bounds", "closed-form state/sample bounds for one parameter point");
    bounds_cmd->add_option("--n", bounds_args.n, "alphabet size n")->required();
    CLI::Option* m2_opt = bounds_cmd->add_option("--m2", bounds_m2, "second alphabet size m2 (adds pair-machine bounds)");
    bounds_cmd->add_option("--c", bounds_args.c, "oversampling exponent c (default 1.5)");
    bounds_cmd->add_option("--beta", bounds_args.beta, "additive accuracy beta (default 0.1)");
    bounds_cmd->add_option("--delta", bounds_args.delta, "failure probability delta (default 0.1)");
    bounds_cmd->add_option("--eps", bounds_args.eps, "estimation accuracy eps for the state lower bound (default 0.1)");
    bounds_cmd->add_option("--format", bounds_args.format, "json|csv");

    BenchTailsArgs tails_args;
    CLI::App* tails_cmd = app.add_subcommand("bench-tails", "empirical window-length tails vs analytic bounds");
    tails_cmd->add_option("--M", tails_args.M, "clock cap M")->required();
    tails_cmd->add_option("--trials", tails_args.trials, "Monte Carlo draws");
    tails_cmd->add_option("--seed", tails_args.seed, "RNG seed");
    tails_cmd->add_option("--format", tails_args.format, "json|csv");

    BiasMixArgs mix_args;
    CLI::App* mix_cmd = app.add_subcommand("bias-mix", "exact TV mixing curve and coupling summary of the bias chain");
    mix_cmd->add_option("--states", mix_args.states, "chain size S")->required();
    mix_cmd->add_option("--p", mix_args.p, "input bias p")->required();
    mix_cmd->add_option("--trials", mix_args.trials, "coupling simulation trials");
    mix_cmd->add_option("--t-max", mix_args.t_max, "curve horizon (default 4 S log2 S)");
    mix_cmd->add_option("--seed", mix_args.seed, "RNG seed");
    mix_cmd->add_option("--format", mix_args.format, "json|csv");

    BenchMixingArgs bmix_args;
    CLI::App* bmix_cmd = app.add_subcommand("bench-mixing", "empirical vs exact TV decay at power-of-two checkpoints");
    bmix_cmd->add_option("--states", bmix_args.states, "chain size S")->required();
    bmix_cmd->add_option("--p", bmix_args.p, "input bias p")->required();
    bmix_cmd->add_option("--t-max", bmix_args.t_max, "horizon (default 4 S log2 S)");
    bmix_cmd->add_option("--chains", bmix_args.chains, "simulated chains");
    bmix_cmd->add_option("--seed", bmix_args.seed, "RNG seed");
    bmix_cmd->add_option("--format", bmix_args.format, "json|csv");

    TrialsArgs trials_args;
    CLI::App* trials_cmd = app.add_subcommand("trials", "repeated estimator runs scored against a target");
    trials_cmd->add_option("--dist", trials_args.dist, "distribution spec")->required();
    trials_cmd->add_option("--n", trials_args.n, "alphabet size n")->required();
    trials_cmd->add_option("--c", trials_args.c, "oversampling exponent c")->required();
    trials_cmd->add_option("--beta", trials_args.beta, "additive accuracy beta")->required();
    trials_cmd->add_option("--delta", trials_args.delta, "failure probability delta")->required();
    trials_cmd->add_option("--trials", trials_args.trials, "independent runs")->required();
    trials_cmd->add_option("--increments", trials_args.increments, "bias-chain increments per run")->required();
    trials_cmd->add_option("--eps", trials_args.eps, "error threshold eps for |estimate - target|")->required();
    double trials_target = 0.0;
    CLI::Option* target_opt = trials_cmd->add_option("--target", trials_target, "explicit target (default: window-statistic oracle)");
    trials_cmd->add_option("--oracle-windows", trials_args.oracle_windows, "oracle window count (default 100x increments)");
    trials_cmd->add_option("--seed", trials_args.seed, "RNG seed");
    trials_cmd->add_option("--threads", trials_args.threads, "worker threads (wall clock only; never results)");
    trials_cmd->add_option("--format", trials_args.format, "json|csv");

    UniformityArgs uni_args;
    CLI::App* uni_cmd = app.add_subcommand("uniformity", "thresholded estimator as a uniformity tester");
    uni_cmd->add_option("--dist", uni_args.dist, "distribution spec")->required();
    uni_cmd->add_option("--n", uni_args.n, "alphabet size n")->required();
    uni_cmd->add_option("--c", uni_args.c, "oversampling exponent c")->required();
    uni_cmd->add_option("--beta", uni_args.beta, "additive accuracy beta")->required();
    uni_cmd->add_option("--delta", uni_args.delta, "failure probability delta")->required();
    uni_cmd->add_option("--eps", uni_args.eps, "uniformity margin eps (threshold log2 n - eps)")->required();
    uni_cmd->add_option("--trials", uni_args.trials, "independent runs")->required();
    uni_cmd->add_option("--increments", uni_args.increments, "bias-chain increments per run")->required();
    uni_cmd->add_option("--seed", uni_args.seed, "RNG seed");
    uni_cmd->add_option("--threads", uni_args.threads, "worker threads (wall clock only; never results)");
    uni_cmd->add_option("--format", uni_args.format, "json|csv");

    MorrisLawArgs law_args;
    CLI::App* law_cmd = app.add_subcommand("morris-law", "exact state law of the approximate counter after m increments");
    law_cmd->add_option("--m", law_args.m, "increment count m")->required();
    law_cmd->add_option("--cap", law_args.cap, "counter cap (0: uncapped, truncated law)");
    law_cmd->add_option("--top", law_args.top, "truncation state for the uncapped law");
    law_cmd->add_option("--format", law_args.format, "json|csv");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        json err;
        err["error"] = e.what();
        err["command"] = "parse";
        std::cout << err.dump() << "\n";
        return e.get_exit_code() == 0 ? 1 : e.get_exit_code();
    }

    try {
        if (*cal_cmd) return cmd_calibrate(cal_args);
        if (*est_cmd) return cmd_estimate(est_args);
        if (*mi_cmd) return cmd_estimate_mi(mi_args);
        if (*bounds_cmd) {
            if (*m2_opt) bounds_args.m2 = bounds_m2;
            return cmd_bounds(bounds_args);
        }
        if (*tails_cmd) return cmd_bench_tails(tails_args);
        if (*mix_cmd) return cmd_bias_mix(mix_args);
        if (*bmix_cmd) return cmd_bench_mixing(bmix_args);
        if (*trials_cmd) {
            if (*target_opt) trials_args.target = trials_target;
            return cmd_trials(trials_args);
        }
        if (*uni_cmd) return cmd_uniformity(uni_args);
        if (*law_cmd) return cmd_morris_law(law_args);
    } catch (const std::exception& e) {
        json err;
        err["error"] = e.what();
        err["command"] = app.get_subcommands().empty() ? "" : app.get_subcommands()[0]->get_name();
        std::cout << err.dump() << "\n";
        return 1;
    }
    return 0;
}
