#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "evarbai/distribution.hpp"
#include "evarbai/evar.hpp"
#include "evarbai/numeric.hpp"
#include "evarbai/projections.hpp"

namespace evarbai {

/// Thrown when an instance has no strictly best arm (tied smallest EVaR),
/// in which case the characteristic time degenerates to zero.
struct degenerate_instance_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Memo for projection values of one fixed distribution, keyed by the
/// threshold rounded to 1e-9.  Single-owner; callers needing concurrency
/// keep one per thread or per call.
struct ProjectionMemo {
    std::unordered_map<long long, double> vals;

    template <class F>
    double eval(double x, F&& compute) {
        long long key = llround(x * 1e9);
        auto it = vals.find(key);
        if (it != vals.end()) return it->second;
        double v = compute();
        vals.emplace(key, v);
        return v;
    }
    void clear() { vals.clear(); }
};

struct PairwiseResult {
    double value = 0.0;
    double x = 0.0;
};

namespace detail {

inline double weighted_term(double weight, double kl) {
    return weight == 0.0 ? 0.0 : weight * kl;
}

struct PairwiseContext {
    const DiscreteDistribution& best;
    const DiscreteDistribution& other;
    const RiskLevel& r;
    const SolverOptions& opts;
    ProjectionMemo* upper_memo = nullptr;
    ProjectionMemo* lower_memo = nullptr;

    double upper_at(double x) const {
        auto compute = [&] {
            return kl_inf_upper(best, Threshold(x), r, opts).value;
        };
        return upper_memo ? upper_memo->eval(x, compute) : compute();
    }
    double lower_at(double x) const {
        auto compute = [&] {
            return kl_inf_lower(other, Threshold(x), r, opts).value;
        };
        return lower_memo ? lower_memo->eval(x, compute) : compute();
    }
};

}  // namespace detail

/// Weighted transportation cost between the best arm and a challenger:
///
///   inf over x in [EVaR(best), EVaR(other)] of
///       t_best * KL_inf^U(best, x) + t_other * KL_inf^L(other, x),
///
/// the common-threshold reduction of the two-sided infimum.  Evaluated on
/// a uniform grid with golden-section refinement around the best cell.
/// A zero weight suppresses its term even when the projection is infinite.
inline PairwiseResult pairwise_g(const DiscreteDistribution& best,
                                 const DiscreteDistribution& other,
                                 double t_best, double t_other,
                                 const RiskLevel& r,
                                 const SolverOptions& opts = {},
                                 ProjectionMemo* upper_memo = nullptr,
                                 ProjectionMemo* lower_memo = nullptr,
                                 std::optional<double> evar_best = std::nullopt,
                                 std::optional<double> evar_other = std::nullopt) {
    if (t_best < 0.0 || t_other < 0.0)
        throw std::invalid_argument("pairwise_g: negative weights");
    double eb = evar_best ? *evar_best : evar(best, r).value;
    double eo = evar_other ? *evar_other : evar(other, r).value;
    if (eb > eo + 1e-12)
        throw std::invalid_argument("pairwise_g: arms are mis-ordered");
    eo = std::max(eo, eb);
    if (eo - eb <= 1e-15 || (t_best == 0.0 && t_other == 0.0)) return {0.0, eb};

    detail::PairwiseContext ctx{best, other, r, opts, upper_memo, lower_memo};
    auto g = [&](double x) {
        double a = detail::weighted_term(t_best, ctx.upper_at(x));
        double b = detail::weighted_term(t_other, ctx.lower_at(x));
        return a + b;
    };

    std::vector<double> xs = linear_grid(eb, eo, opts.pairwise_grid);
    double best_v = kInf;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double v = g(xs[i]);
        if (v < best_v) {
            best_v = v;
            best_i = i;
        }
    }
    double lo = xs[best_i > 0 ? best_i - 1 : 0];
    double hi = xs[std::min(best_i + 1, xs.size() - 1)];
    ScalarOptimum ref = golden_min(g, lo, hi, opts.pairwise_refine_iters);
    if (ref.value < best_v) return {ref.value, ref.x};
    return {best_v, xs[best_i]};
}

struct PerAlternative {
    std::size_t arm = 0;
    double x = 0.0;
    double g_value = 0.0;
};

struct OracleSolution {
    std::vector<double> weights;
    double characteristic_time = 0.0;
    std::vector<PerAlternative> per_alternative;
    std::size_t best_arm = 0;
};

namespace detail {

/// Projection values for one (best, challenger) pair tabulated on the
/// common-threshold grid.  Mirror-ascent iterations read these arrays; only
/// the final evaluation pays for golden-section refinement.
struct PairTable {
    std::size_t challenger;
    std::vector<double> xs;
    std::vector<double> klu;
    std::vector<double> kll;

    double min_at(double t_best, double t_other, std::size_t* arg = nullptr) const {
        double best = kInf;
        std::size_t bi = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            double v = weighted_term(t_best, klu[i]) + weighted_term(t_other, kll[i]);
            if (v < best) {
                best = v;
                bi = i;
            }
        }
        if (arg) *arg = bi;
        return best;
    }
};

}  // namespace detail

/// Oracle sampling weights and characteristic time of a bandit instance:
/// the max over the simplex of the min over challengers of pairwise_g.
///
/// The outer maximization runs on tabulated pairwise values: golden section
/// over the best arm's weight for two arms (the objective is concave), and
/// entropic mirror ascent with averaged iterates otherwise.  Supergradients
/// of the min use the tabulated minimizing threshold per active challenger;
/// ties within 1e-9 average their gradients.  All reductions over arms are
/// performed in canonical (value-sorted) order so that permuting the arms
/// permutes the result exactly.
inline OracleSolution characteristic_time(
    const std::vector<DiscreteDistribution>& arms, const RiskLevel& r,
    const SolverOptions& opts = {}, const std::vector<double>* warm_start = nullptr,
    std::vector<ProjectionMemo>* upper_memos = nullptr,
    std::vector<ProjectionMemo>* lower_memos = nullptr) {
    const std::size_t K = arms.size();
    if (K < 2) throw std::invalid_argument("characteristic_time: need K >= 2");

    std::vector<double> evars(K);
    for (std::size_t a = 0; a < K; ++a) evars[a] = evar(arms[a], r).value;
    std::size_t best = 0;
    for (std::size_t a = 1; a < K; ++a)
        if (evars[a] < evars[best]) best = a;
    for (std::size_t a = 0; a < K; ++a)
        if (a != best && evars[a] - evars[best] <= 1e-9)
            throw degenerate_instance_error(
                "characteristic_time: best arm is not unique");

    auto upper_memo = [&](std::size_t a) -> ProjectionMemo* {
        return upper_memos ? &(*upper_memos)[a] : nullptr;
    };
    auto lower_memo = [&](std::size_t a) -> ProjectionMemo* {
        return lower_memos ? &(*lower_memos)[a] : nullptr;
    };

    // Tabulate both projections on each pair's threshold interval.
    std::vector<detail::PairTable> tables;
    tables.reserve(K - 1);
    for (std::size_t j = 0; j < K; ++j) {
        if (j == best) continue;
        detail::PairTable tab;
        tab.challenger = j;
        tab.xs = linear_grid(evars[best], evars[j], opts.pairwise_grid);
        detail::PairwiseContext ctx{arms[best], arms[j],      r,
                                    opts,       upper_memo(best), lower_memo(j)};
        tab.klu.reserve(tab.xs.size());
        tab.kll.reserve(tab.xs.size());
        for (double xv : tab.xs) {
            tab.klu.push_back(ctx.upper_at(xv));
            tab.kll.push_back(ctx.lower_at(xv));
        }
        tables.push_back(std::move(tab));
    }

    auto phi_table = [&](const std::vector<double>& t) {
        double v = kInf;
        for (const auto& tab : tables)
            v = std::min(v, tab.min_at(t[best], t[tab.challenger]));
        return v;
    };

    std::vector<double> weights(K, 1.0 / static_cast<double>(K));
    if (K == 2) {
        std::size_t other = tables.front().challenger;
        auto phi_w = [&](double wb) {
            return tables.front().min_at(wb, 1.0 - wb);
        };
        ScalarOptimum top = golden_max(phi_w, 0.0, 1.0, 80);
        weights[best] = top.x;
        weights[other] = 1.0 - top.x;
    } else {
        if (warm_start && warm_start->size() == K) weights = *warm_start;
        int iters = (warm_start != nullptr) ? opts.mirror_warm_iters : opts.mirror_iters;
        std::vector<double> average(K, 0.0);
        std::vector<double> best_seen = weights;
        double best_phi = phi_table(weights);
        std::vector<double> grad(K), scaled(K);
        std::vector<double> active_grad_best;
        for (int k = 1; k <= iters; ++k) {
            // Evaluate every challenger, find the min and the active set.
            std::vector<double> gj(tables.size());
            std::vector<std::size_t> arg(tables.size());
            double phi = kInf;
            for (std::size_t p = 0; p < tables.size(); ++p) {
                gj[p] = tables[p].min_at(weights[best], weights[tables[p].challenger],
                                         &arg[p]);
                phi = std::min(phi, gj[p]);
            }
            std::fill(grad.begin(), grad.end(), 0.0);
            active_grad_best.clear();
            std::size_t n_active = 0;
            for (std::size_t p = 0; p < tables.size(); ++p)
                if (gj[p] <= phi + 1e-9) ++n_active;
            for (std::size_t p = 0; p < tables.size(); ++p) {
                if (gj[p] > phi + 1e-9) continue;
                active_grad_best.push_back(tables[p].klu[arg[p]] / n_active);
                grad[tables[p].challenger] = tables[p].kll[arg[p]] / n_active;
            }
            grad[best] = canonical_sum(active_grad_best);

            double step = 1.0 / std::sqrt(static_cast<double>(k));
            for (std::size_t a = 0; a < K; ++a)
                scaled[a] = weights[a] * std::exp(step * grad[a]);
            double norm = canonical_sum(scaled);
            for (std::size_t a = 0; a < K; ++a) weights[a] = scaled[a] / norm;

            for (std::size_t a = 0; a < K; ++a) average[a] += weights[a];
            if (phi > best_phi) {
                best_phi = phi;
                best_seen = weights;
            }
        }
        double norm = canonical_sum(average);
        for (std::size_t a = 0; a < K; ++a) average[a] /= norm;
        weights = phi_table(average) >= phi_table(best_seen) ? average : best_seen;
    }

    OracleSolution out;
    out.best_arm = best;
    out.weights = weights;
    out.per_alternative.reserve(tables.size());
    double tmin = kInf;
    for (const auto& tab : tables) {
        PairwiseResult pr = pairwise_g(arms[best], arms[tab.challenger], weights[best],
                                       weights[tab.challenger], r, opts,
                                       upper_memo(best), lower_memo(tab.challenger),
                                       evars[best], evars[tab.challenger]);
        out.per_alternative.push_back({tab.challenger, pr.x, pr.value});
        tmin = std::min(tmin, pr.value);
    }
    out.characteristic_time = tmin;
    return out;
}

/// Information-theoretic sample-complexity floor log(1/(4 delta)) / T(mu).
inline double sample_complexity_lower_bound(
    const std::vector<DiscreteDistribution>& arms, const RiskLevel& r,
    double delta, const SolverOptions& opts = {}) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("sample_complexity_lower_bound: delta in (0,1)");
    double T = characteristic_time(arms, r, opts).characteristic_time;
    if (!(T > 0.0)) return kInf;
    return std::log(1.0 / (4.0 * delta)) / T;
}

}  // namespace evarbai
