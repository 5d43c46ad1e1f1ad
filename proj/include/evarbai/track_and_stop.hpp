#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "evarbai/allocation.hpp"
#include "evarbai/distribution.hpp"
#include "evarbai/evar.hpp"
#include "evarbai/projections.hpp"

namespace evarbai {

/// GLRT stopping threshold beta(n, delta) = log((K-1)/delta) + 3 log(n+1) + 2.
inline double stopping_threshold(long n, double delta, std::size_t K) {
    if (n < 0 || !(delta > 0.0 && delta < 1.0) || K < 2)
        throw std::invalid_argument("stopping_threshold: bad arguments");
    return std::log(static_cast<double>(K - 1) / delta) +
           3.0 * std::log(static_cast<double>(n) + 1.0) + 2.0;
}

struct StopDecision {
    bool stopped = false;
    double statistic = 0.0;
    double threshold = 0.0;
    std::optional<std::size_t> recommended;
};

/// Mutable per-run bookkeeping: pull counts, per-arm observation histograms,
/// and the C-tracking cumulative weight sums.
struct TrackAndStopState {
    std::vector<std::map<double, long>> histograms;
    std::vector<long> counts;
    std::vector<double> cumulative_weights;
    long n = 0;
    double delta;

    TrackAndStopState(std::size_t K, double delta_)
        : histograms(K), counts(K, 0), cumulative_weights(K, 0.0), delta(delta_) {
        if (K < 2) throw std::invalid_argument("TrackAndStopState: K >= 2");
        if (!(delta_ > 0.0 && delta_ < 1.0))
            throw std::invalid_argument("TrackAndStopState: delta in (0,1)");
    }

    std::size_t num_arms() const { return counts.size(); }

    void record(std::size_t arm, double reward) {
        if (arm >= counts.size())
            throw std::invalid_argument("TrackAndStopState: bad arm index");
        if (!(reward >= 0.0 && reward <= 1.0))
            throw std::invalid_argument("TrackAndStopState: reward outside [0,1]");
        ++histograms[arm][reward];
        ++counts[arm];
        ++n;
    }

    DiscreteDistribution empirical(std::size_t arm) const {
        const auto& h = histograms[arm];
        if (h.empty())
            throw std::logic_error("TrackAndStopState: arm has no observations");
        std::vector<Atom> atoms;
        atoms.reserve(h.size());
        double total = static_cast<double>(counts[arm]);
        for (const auto& [x, c] : h) atoms.push_back({x, c / total});
        return DiscreteDistribution(std::move(atoms));
    }
};

/// C-tracking sampling rule with forced exploration: an arm whose count
/// fell below sqrt(n) - K/2 is pulled first (least-sampled, lowest index);
/// otherwise the arm maximizing the cumulative weight deficit is chosen.
/// The running weight sum is advanced by the given weights either way.
inline std::size_t next_arm(TrackAndStopState& state,
                            const std::vector<double>& weights) {
    const std::size_t K = state.num_arms();
    if (weights.size() != K)
        throw std::invalid_argument("next_arm: weight vector size mismatch");
    for (std::size_t a = 0; a < K; ++a)
        state.cumulative_weights[a] += weights[a];

    double force_below = std::sqrt(static_cast<double>(state.n)) -
                         static_cast<double>(K) / 2.0;
    std::optional<std::size_t> forced;
    for (std::size_t a = 0; a < K; ++a) {
        if (static_cast<double>(state.counts[a]) < force_below) {
            if (!forced || state.counts[a] < state.counts[*forced]) forced = a;
        }
    }
    if (forced) return *forced;

    std::size_t pick = 0;
    double best = -kInf;
    for (std::size_t a = 0; a < K; ++a) {
        double deficit = state.cumulative_weights[a] -
                         static_cast<double>(state.counts[a]);
        if (deficit > best) {
            best = deficit;
            pick = a;
        }
    }
    return pick;
}

struct GlrtResult {
    double value = 0.0;
    std::size_t leader = 0;
};

/// Generalized likelihood ratio statistic: with i(n) the arm of smallest
/// empirical EVaR, the minimum over challengers a of
///
///   inf_x { N_i KL_inf^U(emp_i, x) + N_a KL_inf^L(emp_a, x) }.
///
/// Requires every arm to have been pulled at least once.
inline GlrtResult glrt_statistic(const TrackAndStopState& state, const RiskLevel& r,
                                 const SolverOptions& opts = {},
                                 std::vector<ProjectionMemo>* upper_memos = nullptr,
                                 std::vector<ProjectionMemo>* lower_memos = nullptr) {
    const std::size_t K = state.num_arms();
    for (std::size_t a = 0; a < K; ++a)
        if (state.counts[a] < 1)
            throw std::logic_error("glrt_statistic: every arm needs a sample");

    std::vector<DiscreteDistribution> emp;
    emp.reserve(K);
    std::vector<double> evars(K);
    for (std::size_t a = 0; a < K; ++a) {
        emp.push_back(state.empirical(a));
        evars[a] = evar(emp.back(), r).value;
    }
    std::size_t leader = 0;
    for (std::size_t a = 1; a < K; ++a)
        if (evars[a] < evars[leader]) leader = a;

    double value = kInf;
    for (std::size_t a = 0; a < K; ++a) {
        if (a == leader) continue;
        PairwiseResult pr = pairwise_g(
            emp[leader], emp[a], static_cast<double>(state.counts[leader]),
            static_cast<double>(state.counts[a]), r, opts,
            upper_memos ? &(*upper_memos)[leader] : nullptr,
            lower_memos ? &(*lower_memos)[a] : nullptr, evars[leader], evars[a]);
        value = std::min(value, pr.value);
    }
    return {value < 0.0 ? 0.0 : value, leader};
}

struct TasConfig {
    double delta = 0.1;
    long horizon_cap = 1000000;
    bool strict_tracking = false;
    long dense_recompute_until = 200;
    SolverOptions solver;
};

/// The sampling / stopping / recommendation engine.  Owns one run's state;
/// distinct engines are independent and may run on different threads.
class TrackAndStop {
public:
    TrackAndStop(std::size_t K, const RiskLevel& r, const TasConfig& cfg)
        : r_(r),
          cfg_(cfg),
          state_(K, cfg.delta),
          weights_(K, 1.0 / static_cast<double>(K)),
          upper_memos_(K),
          lower_memos_(K) {}

    const TrackAndStopState& state() const { return state_; }
    const std::vector<double>& weights() const { return weights_; }

    /// Initialization round first (each arm once), then C-tracking.
    std::size_t select_arm() {
        for (std::size_t a = 0; a < state_.num_arms(); ++a)
            if (state_.counts[a] == 0) return a;
        return next_arm(state_, weights_);
    }

    /// Ingest one observation, refresh the oracle weights on the configured
    /// cadence, and evaluate the stopping rule.
    StopDecision step(std::size_t arm, double reward) {
        state_.record(arm, reward);
        upper_memos_[arm].clear();
        lower_memos_[arm].clear();

        bool all_sampled = true;
        for (std::size_t a = 0; a < state_.num_arms(); ++a)
            if (state_.counts[a] == 0) all_sampled = false;
        if (!all_sampled)
            return {false, 0.0, stopping_threshold(state_.n, cfg_.delta,
                                                   state_.num_arms()),
                    std::nullopt};

        maybe_recompute_weights();

        GlrtResult g = glrt_statistic(state_, r_, cfg_.solver, &upper_memos_,
                                      &lower_memos_);
        double beta = stopping_threshold(state_.n, cfg_.delta, state_.num_arms());
        StopDecision d;
        d.statistic = g.value;
        d.threshold = beta;
        d.stopped = g.value >= beta;
        if (d.stopped) d.recommended = g.leader;
        return d;
    }

private:
    void maybe_recompute_weights() {
        bool due = cfg_.strict_tracking || state_.n <= cfg_.dense_recompute_until ||
                   (state_.n - last_recompute_) * 100 >= state_.n;
        if (!due) return;
        last_recompute_ = state_.n;
        std::vector<DiscreteDistribution> emp;
        emp.reserve(state_.num_arms());
        for (std::size_t a = 0; a < state_.num_arms(); ++a)
            emp.push_back(state_.empirical(a));
        try {
            OracleSolution sol =
                characteristic_time(emp, r_, cfg_.solver, have_weights_ ? &weights_ : nullptr,
                                    &upper_memos_, &lower_memos_);
            weights_ = sol.weights;
            have_weights_ = true;
        } catch (const degenerate_instance_error&) {
            // tied empirical leaders: any allocation is optimal this round
            std::fill(weights_.begin(), weights_.end(),
                      1.0 / static_cast<double>(state_.num_arms()));
        }
    }

    RiskLevel r_;
    TasConfig cfg_;
    TrackAndStopState state_;
    std::vector<double> weights_;
    std::vector<ProjectionMemo> upper_memos_;
    std::vector<ProjectionMemo> lower_memos_;
    long last_recompute_ = -1;
    bool have_weights_ = false;
};

}  // namespace evarbai
