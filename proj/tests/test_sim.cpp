#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "evarbai/monte_carlo.hpp"

using namespace evarbai;
using Catch::Approx;

namespace {

const RiskLevel kAlpha02(0.2);

BanditInstance standard_instance() {
    return BanditInstance({BernoulliArm{0.2}, BernoulliArm{0.8}});
}

}  // namespace

TEST_CASE("rng streams") {
    SECTION("counter addressing is reproducible") {
        RngStream a(42), b(42);
        for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
    }
    SECTION("derived streams differ") {
        REQUIRE(derive_stream(1, 0) != derive_stream(1, 1));
        REQUIRE(derive_stream(1, 0) != derive_stream(2, 0));
    }
    SECTION("unit doubles stay in [0,1)") {
        RngStream s(7);
        for (int i = 0; i < 1000; ++i) {
            double u = s.next_unit();
            REQUIRE(u >= 0.0);
            REQUIRE(u < 1.0);
        }
    }
}

TEST_CASE("samplers") {
    SECTION("point mass always returns its location") {
        BanditInstance inst({DiscreteArm{DiscreteDistribution::point_mass(0.3)},
                             BernoulliArm{0.5}});
        RngStream s(1);
        for (int i = 0; i < 50; ++i) REQUIRE(inst.sample(0, s) == 0.3);
    }
    SECTION("bernoulli p = 1 always returns 1") {
        BanditInstance inst({BernoulliArm{1.0}, BernoulliArm{0.5}});
        RngStream s(2);
        for (int i = 0; i < 50; ++i) REQUIRE(inst.sample(0, s) == 1.0);
    }
    SECTION("bernoulli p = 0.5 empirical mean within the CLT bound") {
        BanditInstance inst({BernoulliArm{0.5}, BernoulliArm{0.5}});
        RngStream s(derive_stream(123, 0));
        double sum = 0.0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) sum += inst.sample(0, s);
        REQUIRE(std::abs(sum / n - 0.5) <= 0.006);  // 3 sigma / sqrt(n)
    }
    SECTION("beta samples land on the grid and match the quantized law") {
        BanditInstance inst({BetaQuantizedArm{2.0, 5.0, 0.001}, BernoulliArm{0.5}});
        const DiscreteDistribution& law = inst.law(0);
        double total = 0.0;
        for (const Atom& a : law.atoms()) {
            total += a.mass;
            double steps = a.location / 0.001;
            REQUIRE(std::abs(steps - std::round(steps)) <= 1e-9);
        }
        REQUIRE(total == Approx(1.0).margin(1e-12));

        RngStream s(derive_stream(99, 0));
        double sum = 0.0;
        const int n = 50000;
        for (int i = 0; i < n; ++i) {
            double x = inst.sample(0, s);
            double steps = x / 0.001;
            REQUIRE(std::abs(steps - std::round(steps)) <= 1e-9);
            sum += x;
        }
        // Beta(2,5) has mean 2/7; the quantized mean is within half a step
        REQUIRE(std::abs(sum / n - law.mean()) <= 0.01);
        REQUIRE(std::abs(law.mean() - 2.0 / 7.0) <= 0.001);
    }
    SECTION("instances need two arms and valid parameters") {
        REQUIRE_THROWS_AS(BanditInstance({BernoulliArm{0.5}}), std::invalid_argument);
        REQUIRE_THROWS_AS(BanditInstance({BernoulliArm{1.5}, BernoulliArm{0.5}}),
                          std::invalid_argument);
        REQUIRE_THROWS_AS(
            BanditInstance({BetaQuantizedArm{0.0, 1.0, 0.001}, BernoulliArm{0.5}}),
            std::invalid_argument);
    }
}

TEST_CASE("single trials") {
    BanditInstance inst = standard_instance();
    TasConfig cfg;
    cfg.delta = 0.1;

    SECTION("a seeded trial is reproducible") {
        TrialRecord a = run_trial(inst, kAlpha02, cfg, 7, 0);
        TrialRecord b = run_trial(inst, kAlpha02, cfg, 7, 0);
        REQUIRE(a.tau == b.tau);
        REQUIRE(a.recommended == b.recommended);
        REQUIRE(a.trajectory.counts == b.trajectory.counts);
        REQUIRE(a.trajectory.statistic == b.trajectory.statistic);
        REQUIRE(a.decided);
        REQUIRE(a.correct);
    }
    SECTION("lowering delta never shortens the stopped time on a fixed seed") {
        TasConfig loose = cfg, tight = cfg;
        loose.delta = 0.2;
        tight.delta = 0.02;
        TrialRecord a = run_trial(inst, kAlpha02, loose, 11, 3);
        TrialRecord b = run_trial(inst, kAlpha02, tight, 11, 3);
        REQUIRE(a.decided);
        REQUIRE(b.decided);
        REQUIRE(b.tau >= a.tau);
    }
    SECTION("identical arms hit the horizon cap") {
        BanditInstance same({BernoulliArm{0.5}, BernoulliArm{0.5}});
        TasConfig capped = cfg;
        capped.horizon_cap = 200;
        TrialRecord rec = run_trial(same, kAlpha02, capped, 5, 0);
        REQUIRE_FALSE(rec.decided);
        REQUIRE(rec.tau == 200);
        REQUIRE_FALSE(rec.correct);
    }
}

TEST_CASE("monte carlo harness") {
    BanditInstance inst = standard_instance();

    SECTION("trials = 1 reproduces run_trial with the derived seed") {
        TasConfig cfg;
        cfg.delta = 0.1;
        MonteCarloResult mc = monte_carlo(inst, kAlpha02, 0.1, 1, 21, 1, &cfg);
        TrialRecord direct = run_trial(inst, kAlpha02, cfg, 21, 0);
        REQUIRE(mc.records.size() == 1);
        REQUIRE(mc.records[0].tau == direct.tau);
        REQUIRE(mc.records[0].recommended == direct.recommended);
        REQUIRE(mc.summary.mean_tau == Approx(double(direct.tau)));
    }
    SECTION("summaries are identical across parallelism") {
        MonteCarloResult a = monte_carlo(inst, kAlpha02, 0.15, 12, 33, 1);
        MonteCarloResult b = monte_carlo(inst, kAlpha02, 0.15, 12, 33, 8);
        REQUIRE(a.summary.mean_tau == b.summary.mean_tau);
        REQUIRE(a.summary.std_tau == b.summary.std_tau);
        REQUIRE(a.summary.errors == b.summary.errors);
        REQUIRE(a.summary.lower_bound == b.summary.lower_bound);
        for (std::size_t i = 0; i < a.records.size(); ++i) {
            REQUIRE(a.records[i].tau == b.records[i].tau);
            REQUIRE(a.records[i].stream_seed == b.records[i].stream_seed);
        }
    }
    SECTION("degenerate instances are rejected upfront") {
        BanditInstance same({BernoulliArm{0.5}, BernoulliArm{0.5}});
        REQUIRE_THROWS_AS(monte_carlo(same, kAlpha02, 0.1, 4, 1, 1),
                          degenerate_instance_error);
    }
    SECTION("summary fields are coherent") {
        MonteCarloResult mc = monte_carlo(inst, kAlpha02, 0.1, 8, 3, 4);
        REQUIRE(mc.summary.trials == 8);
        REQUIRE(mc.summary.error_rate ==
                Approx(double(mc.summary.errors) / 8.0));
        REQUIRE(mc.summary.characteristic_time > 0.0);
        REQUIRE(mc.summary.lower_bound ==
                Approx(std::log(1.0 / 0.4) / mc.summary.characteristic_time));
        REQUIRE(mc.summary.ratio > 0.0);
    }
}
