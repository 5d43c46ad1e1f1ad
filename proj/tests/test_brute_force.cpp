#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "evarbai/brute_force.hpp"

using namespace evarbai;
using Catch::Approx;

TEST_CASE("evar_grid basics") {
    RiskLevel r(0.3);
    REQUIRE(evar_grid(DiscreteDistribution::point_mass(0.0), r) == 0.0);
    REQUIRE(evar_grid(DiscreteDistribution::point_mass(1.0), r) == 1.0);
    REQUIRE_THROWS_AS(
        evar_grid(DiscreteDistribution::point_mass(0.5), r, 10),
        std::invalid_argument);

    SECTION("upper-bounds the fast solver and agrees closely") {
        std::mt19937_64 gen(77);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int rep = 0; rep < 30; ++rep) {
            double w0 = unif(gen) + 0.05, w1 = unif(gen) + 0.05, w2 = unif(gen) + 0.05;
            double tot = w0 + w1 + w2;
            DiscreteDistribution d(
                {{unif(gen), w0 / tot}, {unif(gen), w1 / tot}, {unif(gen), w2 / tot}});
            double fast = evar(d, r).value;
            double grid = evar_grid(d, r, 200000);
            REQUIRE(grid >= fast - 1e-9);
            REQUIRE(std::abs(grid - fast) <= 1e-5);
        }
    }
}

TEST_CASE("klinf_primal_grid basics") {
    RiskLevel r(0.2);
    DiscreteDistribution d = DiscreteDistribution::bernoulli(0.4);
    SECTION("feasible input has zero projection") {
        double ev = evar(d, r).value;
        REQUIRE(klinf_primal_grid(d, Threshold(ev - 0.05), r, ProjectionSide::upper,
                                  1.0 / 100) == 0.0);
        REQUIRE(klinf_primal_grid(d, Threshold(ev + 0.05), r, ProjectionSide::lower,
                                  1.0 / 100) == 0.0);
    }
    SECTION("no feasible grid point reports +inf") {
        // EVaR <= 0 forces the point mass at zero, which the grid cannot
        // reach with finite KL from a two-sided law
        REQUIRE(std::isinf(
            klinf_primal_grid(d, Threshold(0.0), r, ProjectionSide::lower, 1.0 / 50)));
    }
    SECTION("step halving never increases the value") {
        Threshold nu(0.8);
        double coarse = klinf_primal_grid(d, nu, r, ProjectionSide::upper, 1.0 / 250);
        double fine = klinf_primal_grid(d, nu, r, ProjectionSide::upper, 1.0 / 500);
        double finer = klinf_primal_grid(d, nu, r, ProjectionSide::upper, 1.0 / 1000);
        REQUIRE(fine <= coarse + 1e-12);
        REQUIRE(finer <= fine + 1e-12);
    }
    SECTION("support cap is enforced") {
        DiscreteDistribution wide(
            {{0.1, 0.25}, {0.3, 0.25}, {0.6, 0.25}, {0.9, 0.25}});
        REQUIRE_THROWS_AS(
            klinf_primal_grid(wide, Threshold(0.5), r, ProjectionSide::upper),
            std::invalid_argument);
    }
}

TEST_CASE("tmu_grid basics") {
    RiskLevel r(0.2);
    SECTION("identical arms have zero characteristic time") {
        std::vector<DiscreteDistribution> arms{DiscreteDistribution::bernoulli(0.4),
                                               DiscreteDistribution::bernoulli(0.4)};
        REQUIRE(tmu_grid(arms, r, 1.0 / 50, 200) == 0.0);
    }
    SECTION("finer grids do not lose more than a grid modulus") {
        std::vector<DiscreteDistribution> arms{DiscreteDistribution::bernoulli(0.2),
                                               DiscreteDistribution::bernoulli(0.8)};
        double coarse = tmu_grid(arms, r, 1.0 / 60, 400);
        double fine = tmu_grid(arms, r, 1.0 / 120, 400);
        REQUIRE(fine >= coarse - 1e-9);  // nested simplex grids
    }
    SECTION("K above 3 is rejected") {
        std::vector<DiscreteDistribution> arms(4, DiscreteDistribution::bernoulli(0.5));
        REQUIRE_THROWS_AS(tmu_grid(arms, r), std::invalid_argument);
    }
}
