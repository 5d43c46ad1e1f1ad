#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace evarbai {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sum of a small vector in value order, so the result does not depend on
/// the order in which the entries were produced.
inline double canonical_sum(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

struct ScalarOptimum {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section maximization of f on [a, b].  Intended for unimodal or
/// concave objectives; on other shapes it converges to a local optimum of
/// the initial bracket.
template <class F>
ScalarOptimum golden_max(F&& f, double a, double b, int iters = 80,
                         double xtol = 0.0) {
    static const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int k = 0; k < iters && (b - a) > xtol; ++k) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    double xm = 0.5 * (a + b);
    return {xm, f(xm)};
}

template <class F>
ScalarOptimum golden_min(F&& f, double a, double b, int iters = 80,
                         double xtol = 0.0) {
    auto neg = [&](double x) { return -f(x); };
    ScalarOptimum r = golden_max(neg, a, b, iters, xtol);
    r.value = -r.value;
    return r;
}

/// Bisection for the unique root of a nondecreasing function g on [lo, hi],
/// assuming g(lo) <= target <= g(hi).
template <class G>
double bisect_nondecreasing(G&& g, double target, double lo, double hi,
                            int iters = 200, double xtol = 0.0) {
    for (int k = 0; k < iters; ++k) {
        double mid = 0.5 * (lo + hi);
        if (hi - lo <= xtol || mid == lo || mid == hi) break;
        if (g(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

/// Log-spaced grid with n points covering [lo, hi], endpoints included.
inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < n; ++i) {
        double u = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
        g.push_back(std::exp(la + u * (lb - la)));
    }
    g.front() = lo;
    g.back() = hi;
    return g;
}

inline std::vector<double> linear_grid(double lo, double hi, int n) {
    std::vector<double> g;
    g.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double u = (n == 1) ? 0.0 : static_cast<double>(i) / (n - 1);
        g.push_back(lo + u * (hi - lo));
    }
    g.back() = hi;
    return g;
}

}  // namespace evarbai
