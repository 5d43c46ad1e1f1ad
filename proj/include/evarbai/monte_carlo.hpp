#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <thread>
#include <vector>

#include "evarbai/allocation.hpp"
#include "evarbai/bandit.hpp"
#include "evarbai/track_and_stop.hpp"

namespace evarbai {

struct TrajectorySummary {
    std::vector<long> counts;
    std::vector<double> empirical_evars;
    double statistic = 0.0;
    double threshold = 0.0;
};

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t stream_seed = 0;
    long tau = 0;
    std::optional<std::size_t> recommended;
    bool correct = false;
    bool decided = false;
    double wall_time = 0.0;
    TrajectorySummary trajectory;
};

inline std::size_t true_best_arm(const BanditInstance& instance, const RiskLevel& r) {
    std::size_t best = 0;
    double be = kInf;
    for (std::size_t a = 0; a < instance.num_arms(); ++a) {
        double e = evar(instance.law(a), r).value;
        if (e < be) {
            be = e;
            best = a;
        }
    }
    return best;
}

/// One full Track-and-Stop run.  The trial's randomness is the stream
/// derived from (base_seed, trial), with one substream per arm, so the
/// record depends only on those integers.
inline TrialRecord run_trial(const BanditInstance& instance, const RiskLevel& r,
                             const TasConfig& cfg, std::uint64_t base_seed,
                             std::size_t trial) {
    auto t0 = std::chrono::steady_clock::now();
    const std::size_t K = instance.num_arms();
    std::uint64_t trial_seed = derive_stream(base_seed, trial);
    std::vector<RngStream> streams;
    streams.reserve(K);
    for (std::size_t a = 0; a < K; ++a)
        streams.emplace_back(derive_stream(trial_seed, a));

    TrackAndStop engine(K, r, cfg);
    TrialRecord rec;
    rec.trial = trial;
    rec.stream_seed = trial_seed;

    StopDecision last;
    while (engine.state().n < cfg.horizon_cap) {
        std::size_t arm = engine.select_arm();
        double reward = instance.sample(arm, streams[arm]);
        last = engine.step(arm, reward);
        if (last.stopped) break;
    }
    rec.tau = engine.state().n;
    rec.decided = last.stopped;
    rec.recommended = last.recommended;
    std::size_t truth = true_best_arm(instance, r);
    rec.correct = last.stopped && last.recommended && *last.recommended == truth;

    rec.trajectory.counts = engine.state().counts;
    rec.trajectory.statistic = last.statistic;
    rec.trajectory.threshold = last.threshold;
    for (std::size_t a = 0; a < K; ++a)
        rec.trajectory.empirical_evars.push_back(
            evar(engine.state().empirical(a), r).value);

    rec.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

struct MonteCarloSummary {
    double delta = 0.0;
    long trials = 0;
    long errors = 0;
    double error_rate = 0.0;
    double mean_tau = 0.0;
    double std_tau = 0.0;
    double characteristic_time = 0.0;
    double lower_bound = 0.0;
    double ratio = 0.0;
};

struct MonteCarloResult {
    MonteCarloSummary summary;
    std::vector<TrialRecord> records;
};

/// Independent seeded trials, optionally spread over `jobs` threads.
/// Trial i always uses the stream derived from (base_seed, i) and the
/// records are merged in trial order, so the result is identical for any
/// parallelism level.  A degenerate instance (tied best EVaR) is rejected
/// upfront by the characteristic-time solve.
inline MonteCarloResult monte_carlo(const BanditInstance& instance,
                                    const RiskLevel& r, double delta, long trials,
                                    std::uint64_t base_seed, int jobs = 1,
                                    const TasConfig* cfg_in = nullptr) {
    if (trials < 1) throw std::invalid_argument("monte_carlo: trials >= 1");
    TasConfig cfg = cfg_in ? *cfg_in : TasConfig{};
    cfg.delta = delta;

    std::vector<DiscreteDistribution> laws;
    for (std::size_t a = 0; a < instance.num_arms(); ++a)
        laws.push_back(instance.law(a));
    OracleSolution oracle = characteristic_time(laws, r, cfg.solver);

    MonteCarloResult out;
    out.records.resize(static_cast<std::size_t>(trials),
                       TrialRecord{});
    jobs = std::max(1, jobs);
    std::atomic<long> cursor{0};
    auto worker = [&] {
        for (;;) {
            long i = cursor.fetch_add(1);
            if (i >= trials) return;
            out.records[static_cast<std::size_t>(i)] =
                run_trial(instance, r, cfg, base_seed, static_cast<std::size_t>(i));
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    MonteCarloSummary& s = out.summary;
    s.delta = delta;
    s.trials = trials;
    double sum = 0.0, sum2 = 0.0;
    for (const TrialRecord& rec : out.records) {
        if (!rec.correct) ++s.errors;
        sum += static_cast<double>(rec.tau);
        sum2 += static_cast<double>(rec.tau) * static_cast<double>(rec.tau);
    }
    double n = static_cast<double>(trials);
    s.error_rate = static_cast<double>(s.errors) / n;
    s.mean_tau = sum / n;
    double var = trials > 1 ? (sum2 - n * s.mean_tau * s.mean_tau) / (n - 1.0) : 0.0;
    s.std_tau = var > 0.0 ? std::sqrt(var) : 0.0;
    s.characteristic_time = oracle.characteristic_time;
    s.lower_bound = oracle.characteristic_time > 0.0
                        ? std::log(1.0 / (4.0 * delta)) / oracle.characteristic_time
                        : kInf;
    s.ratio = oracle.characteristic_time > 0.0
                  ? s.mean_tau * oracle.characteristic_time / std::log(1.0 / delta)
                  : kInf;
    return out;
}

}  // namespace evarbai
