#pragma once

#include <cmath>
#include <stdexcept>

#include "evarbai/distribution.hpp"
#include "evarbai/numeric.hpp"

namespace evarbai {

enum class EvarRegime { interior, boundary };

/// Result of an EVaR evaluation.  In the boundary regime the infimum is
/// only approached as z -> infinity, the minimizer is reported as +inf and
/// the value equals the support maximum.
struct EvarResult {
    double value = 0.0;
    double minimizer = kInf;
    EvarRegime regime = EvarRegime::boundary;

    bool boundary() const { return regime == EvarRegime::boundary; }
};

namespace detail {

/// G(z) = z * d/dz log E[e^{zX}] - log E[e^{zX}].  Nondecreasing in z with
/// G(0) = 0 and sup_z G = -log(mass at the support maximum).
inline double evar_stationarity(const DiscreteDistribution& d, double z) {
    return z * tilted_mean(d, z) - log_mgf(d, z);
}

}  // namespace detail

/// EVaR_alpha of a finite-support law via the exponential-moment program
/// inf_{z>0} (log E[e^{zX}] + rho)/z.
///
/// Regime detection is analytic: since sup_z G(z) = -log(mass at x_max),
/// the infimum is attained at a finite stationary point iff
/// mass(x_max) < 1 - alpha; otherwise the value is x_max itself.
inline EvarResult evar(const DiscreteDistribution& d, const RiskLevel& r) {
    const double xmax = d.support_max();
    if (d.is_point_mass() || d.mass_at_max() >= 1.0 - r.alpha())
        return {xmax, kInf, EvarRegime::boundary};

    const double rho = r.rho();
    auto G = [&](double z) { return detail::evar_stationarity(d, z); };

    // Bracket the root of G(z) = rho by doubling/halving from z = 1.
    double lo = 0.0, hi = 1.0;
    if (G(hi) < rho) {
        while (G(hi) < rho) {
            lo = hi;
            hi *= 2.0;
            if (hi > 1e15) break;  // near-boundary mass split; f is flat here
        }
    } else {
        hi = 1.0;
        lo = 0.5;
        while (G(lo) >= rho) {
            hi = lo;
            lo *= 0.5;
            if (lo < 1e-300) break;
        }
    }
    double zs = hi;
    for (int k = 0; k < 200; ++k) {
        double mid = 0.5 * (lo + hi);
        double g = G(mid);
        if (std::abs(g - rho) <= 1e-12 || hi - lo <= 1e-12 * (1.0 + mid)) {
            zs = mid;
            break;
        }
        if (g < rho)
            lo = mid;
        else
            hi = mid;
        zs = mid;
    }
    double value = (log_mgf(d, zs) + rho) / zs;
    if (value > xmax) value = xmax;
    return {value, zs, EvarRegime::interior};
}

/// Test helper for the robust representation: any q in the KL ball of
/// radius rho around d must have mean below EVaR.  Throws when q violates
/// the ball constraint.
inline double evar_dual_check(const DiscreteDistribution& d, const RiskLevel& r,
                              const DiscreteDistribution& q) {
    double div = kl_divergence(q, d);
    if (!(div <= r.rho() + 1e-9))
        throw std::invalid_argument("evar_dual_check: q outside the KL ball");
    return q.mean();
}

}  // namespace evarbai
