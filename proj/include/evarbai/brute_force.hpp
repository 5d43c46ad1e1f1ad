#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "evarbai/allocation.hpp"
#include "evarbai/distribution.hpp"
#include "evarbai/evar.hpp"
#include "evarbai/projections.hpp"

// Slow, independent references used by tests and acceptance runs.  Grid
// minimization over a restricted feasible set upper-bounds the projections;
// grid maximization over a simplex subset lower-bounds the characteristic
// time.  The fast solvers are compared against these one-sided bounds.

namespace evarbai {

struct GridSpec {
    int z_points = 1024;
    double simplex_step = 1.0 / 2000.0;
    int x_points = 10000;
};

/// Direct grid minimization of (log E[e^{zX}] + rho)/z over a log-spaced
/// z-grid on [1e-4, 1e4], compared against the boundary value x_max.
/// Shares no numeric kernel with evar(): the MGF is evaluated through its
/// own top-anchored factorization.
inline double evar_grid(const DiscreteDistribution& d, const RiskLevel& r,
                        int z_points = 200000) {
    if (z_points < 100) throw std::invalid_argument("evar_grid: z_points >= 100");
    const double xmax = d.support_max();
    const double la = std::log(1e-4), lb = std::log(1e4);
    double best = xmax;
    for (int i = 0; i < z_points; ++i) {
        double z = std::exp(la + (lb - la) * i / (z_points - 1.0));
        double s = 0.0;
        for (const Atom& a : d.atoms()) s += a.mass * std::exp(z * (a.location - xmax));
        double f = xmax + (std::log(s) + r.rho()) / z;
        if (f < best) best = f;
    }
    return best;
}

enum class ProjectionSide { upper, lower };

namespace detail {

template <class Visit>
void for_each_simplex_point(std::size_t dims, long total, std::vector<long>& acc,
                            Visit&& visit) {
    if (dims == 1) {
        acc.push_back(total);
        visit(acc);
        acc.pop_back();
        return;
    }
    for (long k = 0; k <= total; ++k) {
        acc.push_back(k);
        for_each_simplex_point(dims - 1, total - k, acc, visit);
        acc.pop_back();
    }
}

}  // namespace detail

/// Exhaustive primal search for the KL projections: kappa ranges over the
/// mass-grid simplex on supp(eta) united with {0, 1}, feasibility is checked
/// through evar().  An upper bound on the true projection that converges as
/// the step shrinks; +inf when no grid point is feasible.
inline double klinf_primal_grid(const DiscreteDistribution& eta,
                                const Threshold& nu, const RiskLevel& r,
                                ProjectionSide side,
                                double simplex_step = 1.0 / 2000.0) {
    if (eta.size() > 3)
        throw std::invalid_argument("klinf_primal_grid: support size <= 3");
    std::set<double> sup_set{0.0, 1.0};
    for (const Atom& a : eta.atoms()) sup_set.insert(a.location);
    std::vector<double> sup(sup_set.begin(), sup_set.end());
    std::vector<std::size_t> eta_index;
    for (const Atom& a : eta.atoms())
        eta_index.push_back(static_cast<std::size_t>(
            std::lower_bound(sup.begin(), sup.end(), a.location) - sup.begin()));

    const long N = std::lround(1.0 / simplex_step);
    double best = kInf;
    std::vector<long> acc;
    std::vector<Atom> scratch;
    detail::for_each_simplex_point(sup.size(), N, acc, [&](const std::vector<long>& k) {
        double kl = 0.0;
        for (std::size_t i = 0; i < eta_index.size(); ++i) {
            long ki = k[eta_index[i]];
            if (ki == 0) return;
            kl += eta.mass(i) *
                  std::log(eta.mass(i) * static_cast<double>(N) / ki);
        }
        if (kl >= best) return;
        scratch.clear();
        for (std::size_t j = 0; j < sup.size(); ++j)
            if (k[j] > 0)
                scratch.push_back({sup[j], static_cast<double>(k[j]) / N});
        DiscreteDistribution kappa(scratch);
        double e = evar(kappa, r).value;
        bool feasible =
            side == ProjectionSide::upper ? e >= nu.nu : e <= nu.nu;
        if (feasible) best = kl;
    });
    return best;
}

/// Exhaustive max-min over a gridded simplex with a dense common-threshold
/// grid per alternative.  K <= 3 only.
inline double tmu_grid(const std::vector<DiscreteDistribution>& arms,
                       const RiskLevel& r, double simplex_step = 1.0 / 200.0,
                       int x_points = 2000, const SolverOptions& opts = {}) {
    const std::size_t K = arms.size();
    if (K < 2 || K > 3) throw std::invalid_argument("tmu_grid: K must be 2 or 3");

    std::vector<double> evars(K);
    for (std::size_t a = 0; a < K; ++a) evars[a] = evar(arms[a], r).value;
    std::size_t best = 0;
    for (std::size_t a = 1; a < K; ++a)
        if (evars[a] < evars[best]) best = a;

    struct Pair {
        std::size_t arm;
        std::vector<double> klu, kll;
    };
    std::vector<Pair> pairs;
    for (std::size_t j = 0; j < K; ++j) {
        if (j == best) continue;
        Pair p;
        p.arm = j;
        std::vector<double> xs = linear_grid(evars[best], evars[j], x_points);
        for (double x : xs) {
            p.klu.push_back(kl_inf_upper(arms[best], Threshold(x), r, opts).value);
            p.kll.push_back(kl_inf_lower(arms[j], Threshold(x), r, opts).value);
        }
        pairs.push_back(std::move(p));
    }

    auto phi = [&](const std::vector<double>& t) {
        double v = kInf;
        for (const Pair& p : pairs) {
            double m = kInf;
            for (std::size_t i = 0; i < p.klu.size(); ++i) {
                double a = t[best] == 0.0 ? 0.0 : t[best] * p.klu[i];
                double b = t[p.arm] == 0.0 ? 0.0 : t[p.arm] * p.kll[i];
                if (a + b < m) m = a + b;
            }
            v = std::min(v, m);
        }
        return v;
    };

    const long N = std::lround(1.0 / simplex_step);
    double out = 0.0;
    std::vector<long> acc;
    detail::for_each_simplex_point(K, N, acc, [&](const std::vector<long>& k) {
        std::vector<double> t(K);
        for (std::size_t a = 0; a < K; ++a)
            t[a] = static_cast<double>(k[a]) / static_cast<double>(N);
        out = std::max(out, phi(t));
    });
    return out;
}

}  // namespace evarbai
