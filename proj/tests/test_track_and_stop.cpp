#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "evarbai/track_and_stop.hpp"

using namespace evarbai;
using Catch::Approx;

namespace {

const RiskLevel kAlpha02(0.2);

TrackAndStopState make_state(std::vector<std::pair<long, long>> zeros_ones,
                             double delta = 0.1) {
    TrackAndStopState st(zeros_ones.size(), delta);
    for (std::size_t a = 0; a < zeros_ones.size(); ++a) {
        for (long i = 0; i < zeros_ones[a].first; ++i) st.record(a, 0.0);
        for (long i = 0; i < zeros_ones[a].second; ++i) st.record(a, 1.0);
    }
    return st;
}

}  // namespace

TEST_CASE("stopping threshold formula") {
    REQUIRE(stopping_threshold(0, 0.1, 2) ==
            Approx(std::log(10.0) + 2.0).epsilon(1e-14));
    REQUIRE(stopping_threshold(0, std::exp(-1.0), 2) == Approx(3.0).epsilon(1e-14));
    REQUIRE(stopping_threshold(9, 0.05, 3) ==
            Approx(std::log(40.0) + 3.0 * std::log(10.0) + 2.0).epsilon(1e-14));
    REQUIRE(stopping_threshold(9, 0.05, 3) ==
            Approx(12.596634733096074).epsilon(1e-12));
    REQUIRE_THROWS_AS(stopping_threshold(-1, 0.1, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(stopping_threshold(0, 0.1, 1), std::invalid_argument);
}

TEST_CASE("state bookkeeping") {
    TrackAndStopState st(2, 0.1);
    st.record(0, 0.25);
    st.record(0, 0.25);
    st.record(1, 1.0);
    REQUIRE(st.n == 3);
    REQUIRE(st.counts[0] == 2);
    REQUIRE(st.counts[1] == 1);
    DiscreteDistribution emp = st.empirical(0);
    REQUIRE(emp.size() == 1);
    REQUIRE(emp.location(0) == 0.25);
    REQUIRE_THROWS_AS(st.record(0, 1.5), std::invalid_argument);
    REQUIRE_THROWS_AS(st.record(5, 0.5), std::invalid_argument);
}

TEST_CASE("tracking rule") {
    SECTION("after the init round the tracking branch is taken") {
        TrackAndStopState st = make_state({{1, 0}, {0, 1}});
        // counts are (1,1), n = 2: sqrt(2) - 1 < 1, no forced pull
        std::size_t arm = next_arm(st, {0.0, 1.0});
        REQUIRE(arm == 1);
    }
    SECTION("an indicator weight vector keeps picking that arm") {
        TrackAndStopState st = make_state({{1, 0}, {0, 1}});
        for (int i = 0; i < 5; ++i) {
            std::size_t arm = next_arm(st, {0.0, 1.0});
            if (static_cast<double>(st.counts[0]) <
                std::sqrt(static_cast<double>(st.n)) - 1.0)
                REQUIRE(arm == 0);  // forced exploration window
            else
                REQUIRE(arm == 1);
            st.record(arm, arm == 1 ? 1.0 : 0.0);
        }
    }
    SECTION("forced exploration rescues a starved arm") {
        TrackAndStopState st = make_state({{1, 0}, {0, 1}});
        for (int i = 0; i < 200; ++i) st.record(1, 1.0);
        // counts (1, 201), n = 202: sqrt(n) - 1 > 1 forces arm 0
        REQUIRE(next_arm(st, {0.0, 1.0}) == 0);
    }
    SECTION("long-run proportions follow fixed weights") {
        std::vector<double> w{0.3, 0.7};
        TrackAndStopState st(2, 0.1);
        for (int i = 0; i < 10000; ++i) {
            std::size_t arm = next_arm(st, w);
            st.record(arm, 0.5);
        }
        double n = static_cast<double>(st.n);
        for (std::size_t a = 0; a < 2; ++a)
            REQUIRE(std::abs(st.counts[a] / n - w[a]) <= 2.0 / std::sqrt(n));
    }
    SECTION("weight vector size is validated") {
        TrackAndStopState st(2, 0.1);
        REQUIRE_THROWS_AS(next_arm(st, {1.0}), std::invalid_argument);
    }
}

TEST_CASE("glrt statistic") {
    SECTION("identical empiricals give zero") {
        TrackAndStopState st = make_state({{8, 2}, {8, 2}});
        GlrtResult g = glrt_statistic(st, kAlpha02);
        REQUIRE(g.value == 0.0);
        REQUIRE(g.leader == 0);  // tie broken toward the lowest index
    }
    SECTION("unsampled arm violates the precondition") {
        TrackAndStopState st(2, 0.1);
        st.record(0, 1.0);
        REQUIRE_THROWS_AS(glrt_statistic(st, kAlpha02), std::logic_error);
    }
    SECTION("matches a dense common-threshold grid at N = 50/50") {
        TrackAndStopState st = make_state({{40, 10}, {10, 40}});
        GlrtResult g = glrt_statistic(st, kAlpha02);
        REQUIRE(g.leader == 0);

        DiscreteDistribution lead = st.empirical(0);
        DiscreteDistribution chal = st.empirical(1);
        double eb = evar(lead, kAlpha02).value;
        double eo = evar(chal, kAlpha02).value;
        double dense = kInf;
        for (int i = 0; i <= 10000; ++i) {
            double x = eb + (eo - eb) * i / 10000.0;
            double v = 50.0 * kl_inf_upper(lead, Threshold(x), kAlpha02).value +
                       50.0 * kl_inf_lower(chal, Threshold(x), kAlpha02).value;
            dense = std::min(dense, v);
        }
        REQUIRE(g.value <= dense + 1e-9);
        REQUIRE(std::abs(g.value - dense) <= 1e-3);
    }
}

TEST_CASE("engine stepping") {
    TasConfig cfg;
    cfg.delta = 0.1;

    SECTION("init round pulls each arm once and never stops") {
        TrackAndStop engine(3, kAlpha02, cfg);
        for (std::size_t expect = 0; expect < 3; ++expect) {
            std::size_t arm = engine.select_arm();
            REQUIRE(arm == expect);
            StopDecision d = engine.step(arm, expect == 2 ? 1.0 : 0.0);
            REQUIRE_FALSE(d.stopped);
            REQUIRE(d.threshold > 0.0);
        }
        REQUIRE(engine.state().n == 3);
        for (long c : engine.state().counts) REQUIRE(c == 1);
    }
    SECTION("rewards outside [0,1] are rejected") {
        TrackAndStop engine(2, kAlpha02, cfg);
        REQUIRE_THROWS_AS(engine.step(0, -0.1), std::invalid_argument);
    }
    SECTION("decision flags are consistent") {
        TrackAndStop engine(2, kAlpha02, cfg);
        StopDecision d{};
        // drive a well-separated instance deterministically
        for (int i = 0; i < 400 && !d.stopped; ++i) {
            std::size_t arm = engine.select_arm();
            d = engine.step(arm, arm == 0 ? 0.0 : 1.0);
            REQUIRE(d.stopped == (d.statistic >= d.threshold));
        }
        REQUIRE(d.stopped);
        REQUIRE(d.recommended.has_value());
        REQUIRE(*d.recommended == 0);
    }
    SECTION("identical drives produce identical trajectories") {
        TrackAndStop a(2, kAlpha02, cfg), b(2, kAlpha02, cfg);
        for (int i = 0; i < 60; ++i) {
            std::size_t arm_a = a.select_arm();
            std::size_t arm_b = b.select_arm();
            REQUIRE(arm_a == arm_b);
            double reward = (arm_a + i) % 3 == 0 ? 1.0 : 0.0;
            StopDecision da = a.step(arm_a, reward);
            StopDecision db = b.step(arm_b, reward);
            REQUIRE(da.statistic == db.statistic);
            REQUIRE(da.stopped == db.stopped);
            if (da.stopped) break;
        }
    }
}
