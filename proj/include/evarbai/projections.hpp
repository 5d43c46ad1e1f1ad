#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "evarbai/distribution.hpp"
#include "evarbai/evar.hpp"
#include "evarbai/numeric.hpp"

namespace evarbai {

/// EVaR threshold, restricted to the attainable range [0,1].
struct Threshold {
    double nu;
    explicit Threshold(double v) : nu(v) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("Threshold: nu must be in [0,1]");
    }
};

/// Tolerances and search ranges for the projection and allocation solvers.
struct SolverOptions {
    double t_max = 200.0;        // slope range for the upper projection
    int upper_grid = 128;        // log-spaced outer grid (upper)
    double z_max = 1e4;          // slope range for the lower projection
    int lower_grid = 256;        // log-spaced outer grid (lower)
    double boundary_offset = 1e-8;
    int refine_iters = 60;
    int pairwise_grid = 64;
    int pairwise_refine_iters = 48;
    int mirror_iters = 500;
    int mirror_warm_iters = 120;
};

struct DualSolutionU {
    double lambda1 = 0.0;
    double lambda3 = 0.0;
    double value = 0.0;
    DiscreteDistribution primal;
    DiscreteDistribution witness;
};

struct DualSolutionL {
    double z = 1.0;
    double lambda = 0.0;
    double value = 0.0;
    DiscreteDistribution primal;
};

struct LambdaInterval {
    double lo = 0.0;
    double hi = kInf;
    bool unbounded = true;
};

/// Largest admissible lambda3 at slope t for the upper-projection dual:
/// 1/(e^{rho + t(xmax - nu)} - 1), or +inf when the exponential is <= 1.
inline double feasible_lambda3_max(double t, const Threshold& nu,
                                   const RiskLevel& r, double xmax) {
    double w = r.rho() + t * (xmax - nu.nu);
    if (w <= 0.0) return kInf;
    return 1.0 / std::expm1(w);
}

/// Admissible multiplier interval for the lower-projection dual at slope z:
/// [0, inf) when e^{-rho + z nu} <= 1, else [0, 1/(e^{-rho + z nu} - 1)).
inline LambdaInterval feasible_lambda_domain(double z, const Threshold& nu,
                                             const RiskLevel& r) {
    double w = z * nu.nu - r.rho();
    if (w <= 0.0) return {0.0, kInf, true};
    return {0.0, 1.0 / std::expm1(w), false};
}

namespace detail {

struct InnerSolution {
    double multiplier = 0.0;
    double value = 0.0;
    bool at_boundary = false;
};

/// Maximize the concave dual objective f(l) = sum_i w_i log(1 + l*q_i) over
/// l in [0, hi].  q_i may be +inf (treated as the exact limit).  Uses a
/// bracketed Newton iteration on the monotone gradient.
inline InnerSolution concave_dual_max(const std::vector<double>& w,
                                      const std::vector<double>& q, double hi) {
    auto grad = [&](double l) {
        double g = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (std::isinf(q[i]))
                g += (l > 0.0) ? w[i] / l : kInf;
            else
                g += w[i] * q[i] / (1.0 + l * q[i]);
        }
        return g;
    };
    auto hess = [&](double l) {
        double h = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (std::isinf(q[i])) {
                h -= (l > 0.0) ? w[i] / (l * l) : kInf;
            } else {
                double u = 1.0 + l * q[i];
                h -= w[i] * q[i] * q[i] / (u * u);
            }
        }
        return h;
    };
    auto eval = [&](double l) {
        double f = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            double u = std::isinf(q[i]) ? kInf : 1.0 + l * q[i];
            if (u <= 0.0) return -kInf;
            f += w[i] * (std::isinf(u) ? kInf : std::log(u));
        }
        return f;
    };

    double g0 = grad(0.0);
    if (g0 <= 0.0) return {0.0, 0.0, false};
    if (hi <= 0.0) return {0.0, 0.0, true};
    if (grad(hi) >= 0.0) {
        double v = eval(hi);
        return {hi, v > 0.0 ? v : 0.0, true};
    }
    const double gtol = 1e-12 * std::max(1.0, std::isfinite(g0) ? g0 : 1.0);
    double lo = 0.0, up = hi, x = 0.5 * hi;
    for (int k = 0; k < 100; ++k) {
        double g = grad(x);
        if (std::abs(g) <= gtol) break;
        if (g > 0.0)
            lo = x;
        else
            up = x;
        if (up - lo <= 1e-13 * (1.0 + up)) break;
        double h = hess(x);
        double step = (std::isfinite(h) && h < 0.0) ? x - g / h : 0.5 * (lo + up);
        x = (step > lo && step < up) ? step : 0.5 * (lo + up);
    }
    double v = eval(x);
    return {x, v > 0.0 ? v : 0.0, false};
}

/// Stable log(1 + l*(e^E - 1)) for l >= 0; E may be large.
inline double log_tilt_term(double E, double l) {
    if (l == 0.0) return 0.0;
    if (E <= 0.0) {
        double arg = 1.0 + l * std::expm1(E);
        return arg > 0.0 ? std::log(arg) : -kInf;
    }
    if (E > 36.0) {
        // 1 - l underflows next to l*e^E
        return E + std::log(l + (1.0 - l) * std::exp(-E));
    }
    double arg = 1.0 + l * std::expm1(E);
    return arg > 0.0 ? std::log(arg) : -kInf;
}

}  // namespace detail

/// KL_inf^U(eta, nu): minimal KL(eta || kappa) over laws kappa on [0,1]
/// with EVaR_alpha(kappa) >= nu, computed through the concave dual
///
///   max_{lambda1, lambda3}  E_eta[ log(1 + lambda3 (1 - e^{(lambda1/lambda3)(X - nu) + rho})) ]
///
/// parametrized by the slope t = lambda1/lambda3 (outer log grid plus
/// golden-section refinement) with the inner concave maximization over
/// lambda3 solved exactly.  Admissibility of lambda3 is governed by the
/// positivity of the log argument over the ambient interval, which binds
/// at x = 1.  The primal is recovered from the stationarity density on
/// eta's support; any missing mass is the optimizer's atom at 1.
inline DualSolutionU kl_inf_upper(const DiscreteDistribution& eta,
                                  const Threshold& nu, const RiskLevel& r,
                                  const SolverOptions& opts = {}) {
    EvarResult ev = evar(eta, r);
    if (ev.value >= nu.nu) return {0.0, 0.0, 0.0, eta, eta};

    const double rho = r.rho();
    const std::size_t m = eta.size();
    std::vector<double> w(m), x(m);
    for (std::size_t i = 0; i < m; ++i) {
        w[i] = eta.mass(i);
        x[i] = eta.location(i);
    }

    auto solve = [&](double eps_b) {
        std::vector<double> negc(m);
        auto inner = [&](double t) {
            double cap = feasible_lambda3_max(t, nu, r, 1.0);
            for (std::size_t i = 0; i < m; ++i)
                negc[i] = -std::expm1(t * (x[i] - nu.nu) + rho);
            return detail::concave_dual_max(w, negc, cap * (1.0 - eps_b));
        };

        std::vector<double> ts = log_grid(1e-3, opts.t_max, opts.upper_grid);
        ts.insert(ts.begin(), 0.0);
        double best_v = 0.0;
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < ts.size(); ++k) {
            double v = inner(ts[k]).value;
            if (v > best_v) {
                best_v = v;
                best_k = k;
            }
        }
        double lo = ts[best_k > 0 ? best_k - 1 : 0];
        double hi = ts[std::min(best_k + 1, ts.size() - 1)];
        ScalarOptimum ref = golden_max(
            [&](double t) { return inner(t).value; }, lo, hi, opts.refine_iters);
        double t_star = ref.value >= best_v ? ref.x : ts[best_k];
        detail::InnerSolution sol = inner(t_star);

        // dkappa*/deta = 1 / (1 + lambda3 (1 - e^{t(x - nu) + rho}));
        // the deficit is the optimizer's mass at the top of the interval.
        std::vector<Atom> atoms;
        atoms.reserve(m + 1);
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double u = 1.0 + sol.multiplier * negc[i];
            double mass = w[i] / u;
            atoms.push_back({x[i], mass});
            total += mass;
        }
        double deficit = 1.0 - total;
        if (deficit > 1e-14)
            atoms.push_back({1.0, deficit});
        else if (total != 1.0)
            for (Atom& a : atoms) a.mass /= total;
        DiscreteDistribution primal(std::move(atoms));
        return std::make_pair(DualSolutionU{t_star * sol.multiplier, sol.multiplier,
                                            sol.value, primal, primal},
                              t_star);
    };

    auto [res, t_star] = solve(opts.boundary_offset);
    if (evar(res.primal, r).value < nu.nu - 1e-6) {
        auto [res2, t2] = solve(1e-12);
        res = res2;
        t_star = t2;
    }
    res.witness =
        res.lambda3 > 0.0 ? exponential_tilt(res.primal, t_star) : res.primal;
    return res;
}

/// KL_inf^L(eta, nu): minimal KL(eta || kappa) over laws with
/// EVaR_alpha(kappa) <= nu.  One-dimensional outer infimum over the slope
/// z > rho/nu (log grid plus golden-section refinement); for each z the
/// inner problem is the concave scalar dual
///
///   sup_{lambda in D(z, nu)}  E_eta[ log(1 - lambda (e^{-rho + z nu} - e^{z X})) ]
///
/// evaluated in the overflow-free parametrization lt = lambda e^{-rho+z nu}.
/// Returns the +inf sentinel when nu = 0 and eta is not the point mass at 0,
/// where no finite-KL law is feasible.
inline DualSolutionL kl_inf_lower(const DiscreteDistribution& eta,
                                  const Threshold& nu, const RiskLevel& r,
                                  const SolverOptions& opts = {}) {
    EvarResult ev = evar(eta, r);
    if (ev.value <= nu.nu) return {1.0, 0.0, 0.0, eta};
    if (nu.nu == 0.0) return {1.0, 0.0, kInf, eta};

    const double rho = r.rho();
    const std::size_t m = eta.size();
    std::vector<double> w(m), x(m);
    for (std::size_t i = 0; i < m; ++i) {
        w[i] = eta.mass(i);
        x[i] = eta.location(i);
    }

    auto solve = [&](double eps_b) {
        std::vector<double> q(m);
        auto inner = [&](double z) {
            // Positivity over the ambient interval binds at x = 0:
            // lt < -1/expm1(rho - z nu), finite for every admissible z.
            double cap = -1.0 / std::expm1(rho - z * nu.nu);
            for (std::size_t i = 0; i < m; ++i)
                q[i] = std::expm1(z * (x[i] - nu.nu) + rho);
            detail::InnerSolution s = detail::concave_dual_max(w, q, cap * (1.0 - eps_b));
            // Recompute the value through the stable term; concave_dual_max
            // already matches it except in extreme exponent ranges.
            double v = 0.0;
            for (std::size_t i = 0; i < m; ++i)
                v += w[i] * detail::log_tilt_term(z * (x[i] - nu.nu) + rho, s.multiplier);
            s.value = v > 0.0 ? v : 0.0;
            return s;
        };

        double z_lo = (rho / nu.nu) * (1.0 + 1e-9);
        double z_hi = std::max(opts.z_max, 10.0 * z_lo);
        std::vector<double> zs = log_grid(z_lo, z_hi, opts.lower_grid);
        double best_v = kInf;
        std::size_t best_k = 0;
        for (std::size_t k = 0; k < zs.size(); ++k) {
            double v = inner(zs[k]).value;
            if (v < best_v) {
                best_v = v;
                best_k = k;
            }
        }
        double lo = zs[best_k > 0 ? best_k - 1 : 0];
        double hi = zs[std::min(best_k + 1, zs.size() - 1)];
        ScalarOptimum ref = golden_min(
            [&](double z) { return inner(z).value; }, lo, hi, opts.refine_iters);
        double z_star = ref.value <= best_v ? ref.x : zs[best_k];
        detail::InnerSolution sol = inner(z_star);

        // dkappa*/deta = 1 / (1 - lambda (e^{-rho + z nu} - e^{z x}));
        // missing mass is the optimizer's atom at 0.
        std::vector<Atom> atoms;
        atoms.reserve(m + 1);
        double total = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double u = 1.0 + sol.multiplier * q[i];
            double mass = std::isinf(u) ? 0.0 : w[i] / u;
            atoms.push_back({x[i], mass});
            total += mass;
        }
        double deficit = 1.0 - total;
        if (deficit > 1e-14)
            atoms.push_back({0.0, deficit});
        else if (total != 1.0)
            for (Atom& a : atoms) a.mass /= total;
        DiscreteDistribution primal(std::move(atoms));
        double lambda = sol.multiplier > 0.0
                            ? std::exp(std::log(sol.multiplier) + rho - z_star * nu.nu)
                            : 0.0;
        return DualSolutionL{z_star, lambda, sol.value, primal};
    };

    DualSolutionL res = solve(opts.boundary_offset);
    if (evar(res.primal, r).value > nu.nu + 1e-6) res = solve(1e-12);
    return res;
}

}  // namespace evarbai
