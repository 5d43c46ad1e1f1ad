#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "evarbai/numeric.hpp"

namespace evarbai {

/// One support point of a finite-support law on [0,1].
struct Atom {
    double location = 0.0;
    double mass = 0.0;
};

inline constexpr double kLocationMergeTol = 1e-12;
inline constexpr double kMassDropTol = 1e-15;
inline constexpr double kMassSumTol = 1e-12;

/// Finite-support probability measure on [0,1].
///
/// Construction sorts the atoms, merges locations closer than 1e-12,
/// drops masses below 1e-15 (renormalizing afterwards), and validates that
/// the remaining masses are positive and sum to one within 1e-12.
/// Instances are immutable after construction.
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(std::vector<Atom> atoms) {
        if (atoms.empty())
            throw std::invalid_argument("DiscreteDistribution: no atoms");
        std::sort(atoms.begin(), atoms.end(),
                  [](const Atom& a, const Atom& b) { return a.location < b.location; });
        bool dropped = false;
        for (const Atom& a : atoms) {
            if (!std::isfinite(a.location) || a.location < 0.0 || a.location > 1.0)
                throw std::invalid_argument(
                    "DiscreteDistribution: location outside [0,1]: " +
                    std::to_string(a.location));
            if (!std::isfinite(a.mass) || a.mass < 0.0)
                throw std::invalid_argument("DiscreteDistribution: negative mass");
            if (a.mass < kMassDropTol) {
                dropped = true;
                continue;
            }
            if (!atoms_.empty() &&
                a.location - atoms_.back().location <= kLocationMergeTol) {
                atoms_.back().mass += a.mass;
            } else {
                atoms_.push_back(a);
            }
        }
        if (atoms_.empty())
            throw std::invalid_argument("DiscreteDistribution: all mass dropped");
        double total = 0.0;
        for (const Atom& a : atoms_) total += a.mass;
        if (dropped) {
            for (Atom& a : atoms_) a.mass /= total;
        } else if (std::abs(total - 1.0) > kMassSumTol) {
            throw std::invalid_argument(
                "DiscreteDistribution: masses sum to " + std::to_string(total));
        }
    }

    static DiscreteDistribution point_mass(double x) {
        return DiscreteDistribution({{x, 1.0}});
    }

    static DiscreteDistribution bernoulli(double p) {
        if (p <= 0.0) return point_mass(0.0);
        if (p >= 1.0) return point_mass(1.0);
        return DiscreteDistribution({{0.0, 1.0 - p}, {1.0, p}});
    }

    std::span<const Atom> atoms() const { return atoms_; }
    std::size_t size() const { return atoms_.size(); }
    double location(std::size_t i) const { return atoms_[i].location; }
    double mass(std::size_t i) const { return atoms_[i].mass; }

    double support_min() const { return atoms_.front().location; }
    double support_max() const { return atoms_.back().location; }
    double mass_at_max() const { return atoms_.back().mass; }
    bool is_point_mass() const { return atoms_.size() == 1; }

    double mean() const {
        double s = 0.0;
        for (const Atom& a : atoms_) s += a.mass * a.location;
        return s;
    }

private:
    std::vector<Atom> atoms_;
};

/// Exact-support equality up to the construction tolerances.
inline bool approx_equal(const DiscreteDistribution& p,
                         const DiscreteDistribution& q, double tol = 1e-12) {
    if (p.size() != q.size()) return false;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (std::abs(p.location(i) - q.location(i)) > kLocationMergeTol) return false;
        if (std::abs(p.mass(i) - q.mass(i)) > tol) return false;
    }
    return true;
}

/// Risk level alpha in (0,1) together with the induced KL-ball radius
/// rho = -log(1 - alpha).
class RiskLevel {
public:
    explicit RiskLevel(double alpha) : alpha_(alpha) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("RiskLevel: alpha must be in (0,1)");
        rho_ = -std::log1p(-alpha);
    }
    double alpha() const { return alpha_; }
    double rho() const { return rho_; }

private:
    double alpha_;
    double rho_;
};

/// log E[e^{zX}], evaluated with max-subtraction so large z is safe.
/// For X in [0,1] and z >= 0 the result lies in [0, z].
inline double log_mgf(const DiscreteDistribution& d, double z) {
    double m = z * d.support_max();
    double s = 0.0;
    for (const Atom& a : d.atoms()) s += a.mass * std::exp(z * a.location - m);
    return m + std::log(s);
}

/// Mean of the exponentially tilted law dQ_z/dd = e^{zX}/E[e^{zX}];
/// equals the derivative of log_mgf in z.
inline double tilted_mean(const DiscreteDistribution& d, double z) {
    double m = z * d.support_max();
    double num = 0.0, den = 0.0;
    for (const Atom& a : d.atoms()) {
        double w = a.mass * std::exp(z * a.location - m);
        num += w * a.location;
        den += w;
    }
    return num / den;
}

/// Variance of the tilted law; the second derivative of log_mgf in z.
inline double tilted_variance(const DiscreteDistribution& d, double z) {
    double m = z * d.support_max();
    double num1 = 0.0, num2 = 0.0, den = 0.0;
    for (const Atom& a : d.atoms()) {
        double w = a.mass * std::exp(z * a.location - m);
        num1 += w * a.location;
        num2 += w * a.location * a.location;
        den += w;
    }
    double mu = num1 / den;
    double v = num2 / den - mu * mu;
    return v > 0.0 ? v : 0.0;
}

/// KL(p || q) for finite-support laws with exact-location atom matching.
/// Returns +infinity when some atom of p has no matching atom of q;
/// absolute-continuity failure is a value, not an error.
inline double kl_divergence(const DiscreteDistribution& p,
                            const DiscreteDistribution& q) {
    double s = 0.0;
    std::size_t j = 0;
    for (const Atom& a : p.atoms()) {
        while (j < q.size() && q.location(j) < a.location - kLocationMergeTol) ++j;
        if (j >= q.size() || std::abs(q.location(j) - a.location) > kLocationMergeTol)
            return kInf;
        s += a.mass * std::log(a.mass / q.mass(j));
    }
    return s < 0.0 ? 0.0 : s;
}

/// Exponential change of measure with density proportional to e^{sX};
/// s may have either sign.  The support is unchanged.
inline DiscreteDistribution exponential_tilt(const DiscreteDistribution& d,
                                             double s) {
    if (s == 0.0) return d;
    double m = s >= 0.0 ? s * d.support_max() : s * d.support_min();
    std::vector<Atom> out;
    out.reserve(d.size());
    double total = 0.0;
    for (const Atom& a : d.atoms()) {
        double w = a.mass * std::exp(s * a.location - m);
        out.push_back({a.location, w});
        total += w;
    }
    for (Atom& a : out) a.mass /= total;
    return DiscreteDistribution(std::move(out));
}

/// Downward Esscher tilt dk/dd = e^{-tX}/E[e^{-tX}] for t >= 0, satisfying
/// KL(d || tilt) = t E[X] + log E[e^{-tX}] <= t.
inline DiscreteDistribution esscher_tilt(const DiscreteDistribution& d, double t) {
    if (t < 0.0) throw std::invalid_argument("esscher_tilt: t must be >= 0");
    return exponential_tilt(d, -t);
}

}  // namespace evarbai
