#pragma once

#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include <boost/math/distributions/beta.hpp>

#include "evarbai/distribution.hpp"
#include "evarbai/rng.hpp"

namespace evarbai {

struct DiscreteArm {
    DiscreteDistribution dist;
};

struct BernoulliArm {
    double p;
};

/// Beta(a, b) rewards rounded to multiples of `grid`.  The quantized law is
/// available exactly, so ground truth (EVaR ordering, characteristic time)
/// is computed for the distribution actually sampled, not the continuous one.
struct BetaQuantizedArm {
    double a;
    double b;
    double grid;
};

using ArmSpec = std::variant<DiscreteArm, BernoulliArm, BetaQuantizedArm>;

namespace detail {

inline DiscreteDistribution beta_quantized_law(double a, double b, double grid) {
    if (!(a > 0.0 && b > 0.0))
        throw std::invalid_argument("beta_quantized: shape parameters must be > 0");
    if (!(grid > 0.0 && grid <= 0.5))
        throw std::invalid_argument("beta_quantized: grid step must be in (0, 0.5]");
    boost::math::beta_distribution<double> beta(a, b);
    long n = std::lround(1.0 / grid);
    std::vector<Atom> atoms;
    atoms.reserve(static_cast<std::size_t>(n) + 1);
    double prev = 0.0;
    for (long k = 0; k <= n; ++k) {
        double upper = (k == n) ? 1.0 : std::min(1.0, (k + 0.5) * grid);
        double cdf = (k == n) ? 1.0 : boost::math::cdf(beta, upper);
        double mass = cdf - prev;
        prev = cdf;
        if (mass > 0.0) atoms.push_back({std::min(1.0, k * grid), mass});
    }
    return DiscreteDistribution(std::move(atoms));
}

}  // namespace detail

/// A K-armed environment with exact finite-support ground-truth laws.
class BanditInstance {
public:
    explicit BanditInstance(std::vector<ArmSpec> arms)
        : arms_(std::move(arms)) {
        if (arms_.size() < 2)
            throw std::invalid_argument("BanditInstance: need at least two arms");
        laws_.reserve(arms_.size());
        for (const ArmSpec& a : arms_) {
            if (const auto* d = std::get_if<DiscreteArm>(&a)) {
                laws_.push_back(d->dist);
            } else if (const auto* bern = std::get_if<BernoulliArm>(&a)) {
                if (!(bern->p >= 0.0 && bern->p <= 1.0))
                    throw std::invalid_argument("BanditInstance: bernoulli p in [0,1]");
                laws_.push_back(DiscreteDistribution::bernoulli(bern->p));
            } else {
                const auto& bq = std::get<BetaQuantizedArm>(a);
                laws_.push_back(detail::beta_quantized_law(bq.a, bq.b, bq.grid));
            }
        }
    }

    std::size_t num_arms() const { return arms_.size(); }
    const std::vector<ArmSpec>& specs() const { return arms_; }
    const DiscreteDistribution& law(std::size_t arm) const { return laws_.at(arm); }

    double sample(std::size_t arm, RngStream& rng) const {
        const ArmSpec& spec = arms_.at(arm);
        double u = rng.next_unit();
        if (const auto* bern = std::get_if<BernoulliArm>(&spec))
            return u < bern->p ? 1.0 : 0.0;
        if (const auto* bq = std::get_if<BetaQuantizedArm>(&spec)) {
            boost::math::beta_distribution<double> beta(bq->a, bq->b);
            double x = u <= 0.0 ? 0.0 : boost::math::quantile(beta, u);
            double q = std::lround(x / bq->grid) * bq->grid;
            return std::min(1.0, std::max(0.0, q));
        }
        const auto& d = std::get<DiscreteArm>(spec).dist;
        double acc = 0.0;
        for (const Atom& a : d.atoms()) {
            acc += a.mass;
            if (u < acc) return a.location;
        }
        return d.support_max();
    }

private:
    std::vector<ArmSpec> arms_;
    std::vector<DiscreteDistribution> laws_;
};

}  // namespace evarbai
