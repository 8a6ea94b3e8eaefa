#include <cmath>
#include <random>

#include "doctest.h"
#include "ldm/loader.hpp"
#include "support/oracles.hpp"
#include "support/random_instances.hpp"

using namespace ldm;

namespace {

Network single_arc(double alpha = 0.01, double beta = 1.0, double q = 10.0) {
    return Network({{"1", "2"}, {{"a", "1", "2", alpha, beta}}, {{"p", {"1", "2"}, {"a"}}}, {{{"1", "2"}, q}}});
}

Network two_arc_chain(double beta1, double beta2, double alpha = 0.0) {
    return Network({{"1", "2", "3"},
                    {{"a1", "1", "2", alpha, beta1}, {"a2", "2", "3", alpha, beta2}},
                    {{"p", {"1", "3"}, {"a1", "a2"}}},
                    {{{"1", "3"}, 1.0}}});
}

PathFlowVector one_flow(const Network& net, StepFunction f) {
    auto h = PathFlowVector::zero(net);
    h[0] = std::move(f);
    return h;
}

}  // namespace

TEST_CASE("load_arc on an empty arc is free flow") {
    const Arc arc{"a", "1", "2", 0.01, 1.0};
    const auto [tau, exit] = load_arc(arc, CumulativeCurve::zero(0.0), TimeHorizon(0.0, 4.0, 3.0));
    for (double t : {0.0, 0.3, 1.7, 3.9}) CHECK(tau(t) == doctest::Approx(t + 1.0).epsilon(1e-15));
    CHECK(exit.final_value() == 0.0);
    CHECK(tau(-2.0) == doctest::Approx(-1.0));
}

TEST_CASE("load_arc reproduces the closed-form single-arc solution") {
    // U(t) = 10 t on [0, 1]: tau = t + 0.01 * 10 t + 1 = 1.1 t + 1 on [0, 1]
    const Arc arc{"a", "1", "2", 0.01, 1.0};
    const auto entry = cumulate(StepFunction::constant(0.0, 1.0, 10.0), TimeHorizon(0.0, 4.0));
    const auto [tau, exit] = load_arc(arc, entry, TimeHorizon(0.0, 4.0, 3.0));
    for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        CHECK(std::abs(tau(t) - (1.1 * t + 1.0)) <= 1e-12);
    }
    // exit(s) = U(tau^{-1}(s)) = 10 (s - 1) / 1.1 on [1, 2.1]
    for (int i = 0; i <= 110; ++i) {
        const double s = 1.0 + i / 100.0;
        CHECK(std::abs(exit(s) - 10.0 * (s - 1.0) / 1.1) <= 1e-12);
    }
    CHECK(exit(0.5) == 0.0);
    CHECK(exit(5.0) == doctest::Approx(10.0));
}

TEST_CASE("load_arc rejects bad input") {
    const Arc good{"a", "1", "2", 0.01, 1.0};
    const CumulativeCurve offset({0.0, 1.0}, {1.0, 2.0});
    CHECK_THROWS_AS(load_arc(good, offset, TimeHorizon(0.0, 2.0, 1.0)), std::invalid_argument);
    CHECK_THROWS_AS(load_arc({"a", "1", "2", -1.0, 1.0}, CumulativeCurve::zero(0.0), TimeHorizon(0.0, 2.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(load_arc({"a", "1", "2", 0.0, 0.0}, CumulativeCurve::zero(0.0), TimeHorizon(0.0, 2.0)),
                    std::invalid_argument);
}

TEST_CASE("exit time inverse") {
    const auto ff = ExitTimeFunction::free_flow(2.0, 0.0);
    CHECK(ff.inverse(5.0) == doctest::Approx(3.0));
    const ExitTimeFunction lin(1.0, {0.0, 1.0}, {1.0, 2.1}, false);
    CHECK(lin.inverse(2.1) == doctest::Approx(1.0));
    CHECK(lin.inverse(0.5) == doctest::Approx(-0.5));  // free-flow extension before t0
    CHECK_THROWS_AS(lin(3.0), HorizonExhausted);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> step(0.01, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> t{0.0}, v{1.0};
        for (int i = 0; i < 10; ++i) {
            t.push_back(t.back() + step(rng));
            v.push_back(v.back() + step(rng));
        }
        const ExitTimeFunction tau(1.0, t, v, false);
        for (int i = 0; i < 20; ++i) {
            const double x = std::uniform_real_distribution<double>(0.0, t.back())(rng);
            CHECK(std::abs(tau.inverse(tau(x)) - x) <= 1e-12);
        }
    }
}

TEST_CASE("load_network with zero flow leaves every arc empty") {
    const Network net = two_arc_chain(1.0, 2.0, 0.05);
    const auto res = load_network(net, PathFlowVector::zero(net), TimeHorizon(0.0, 4.0, 9.0));
    CHECK_FALSE(res.truncated);
    for (const auto& s : res.arcs) {
        CHECK(s.entry.final_value() == 0.0);
        CHECK(s.exit.final_value() == 0.0);
        CHECK(s.tau(1.5) == doctest::Approx(1.5 + net.arc(s.arc).beta));
    }
    CHECK(path_exit_time(res, net, "p", 0.0) == doctest::Approx(3.0));
    CHECK(path_delay(res, net, "p", 2.5) == doctest::Approx(3.0));
}

TEST_CASE("load_network on one arc matches the single-arc loader") {
    const Network net = single_arc();
    const TimeHorizon hz(0.0, 4.0, 3.0);
    const auto res = load_network(net, one_flow(net, StepFunction::constant(0.0, 1.0, 10.0)), hz);
    const ArcState& s = res.arcs[0];
    const auto departures = cumulate(StepFunction::constant(0.0, 1.0, 10.0), hz);
    for (double t : {0.0, 0.25, 0.5, 1.0, 2.0}) CHECK(std::abs(s.entry(t) - departures(t)) <= 1e-12);
    for (double x : {1.0, 1.3, 1.8, 2.1}) CHECK(std::abs(s.exit(x) - 10.0 * (x - 1.0) / 1.1) <= 1e-9);
    CHECK(path_exit_time(res, net, "p", 0.5) == doctest::Approx(1.55).epsilon(1e-14));
    CHECK(path_delay(res, net, "p", 0.5) == doctest::Approx(1.05).epsilon(1e-14));
}

TEST_CASE("first particle on an empty two-arc path exits after both free-flow delays") {
    const Network net = two_arc_chain(1.0, 2.0, 0.02);
    const auto res = load_network(net, one_flow(net, StepFunction::constant(0.0, 1.0, 5.0)), TimeHorizon(0.0, 3.0, 9.0));
    // particle tracing: the first vehicle sees empty arcs
    CHECK(path_exit_time(res, net, "p", 0.0) == doctest::Approx(3.0).epsilon(1e-14));
    // later particles: compose the arc maps by hand
    const double t = 0.6;
    const double on_a2 = res.arcs[0].tau(t);
    CHECK(on_a2 == doctest::Approx(t + 1.0 + 0.02 * 5.0 * t));
    CHECK(path_exit_time(res, net, "p", t) == doctest::Approx(res.arcs[1].tau(on_a2)));
}

TEST_CASE("path exit time is strictly increasing and delays exceed free flow") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        auto spec = testing::random_network(rng);
        const TimeHorizon hz(0.0, 3.0, 30.0);
        const auto h = testing::random_flows(rng, spec, hz);
        const Network net(spec);
        const auto res = load_network(net, h, hz);
        REQUIRE_FALSE(res.truncated);
        for (std::size_t p = 0; p < net.paths().size(); ++p) {
            double free_flow = 0.0;
            for (std::size_t a : net.path_arcs(p)) free_flow += net.arcs()[a].beta;
            double prev = -1e300;
            for (int i = 0; i <= 60; ++i) {
                const double t = 3.0 * i / 60.0;
                const double x = path_exit_time(res, net, p, t);
                CHECK(x > prev);
                CHECK(path_delay(res, net, p, t) >= free_flow - 1e-12);
                prev = x;
            }
        }
    }
}

TEST_CASE("split_commodities") {
    SUBCASE("single commodity exits like the aggregate") {
        const Network net = single_arc();
        const auto res = load_network(net, one_flow(net, StepFunction({0.0, 0.5, 1.0}, {4.0, 12.0})), TimeHorizon(0.0, 2.0, 6.0));
        const ArcState s = split_commodities(res.arcs[0]);
        for (double x = 0.0; x < 6.0; x += 0.05) CHECK(std::abs(s.commodities[0].exit(x) - s.exit(x)) <= 1e-9);
    }
    SUBCASE("two equal commodities exit equally; zero entry exits nothing") {
        const Network net({{"1", "2"},
                           {{"a", "1", "2", 0.03, 1.0}},
                           {{"p", {"1", "2"}, {"a"}}, {"q", {"1", "2"}, {"a"}}, {"r", {"1", "2"}, {"a"}}},
                           {{{"1", "2"}, 20.0}}});
        auto h = PathFlowVector::zero(net);
        h[0] = StepFunction::constant(0.0, 1.0, 10.0);
        h[1] = StepFunction::constant(0.0, 1.0, 10.0);
        const auto res = load_network(net, h, TimeHorizon(0.0, 2.0, 6.0));
        const ArcState s = split_commodities(res.arcs[0]);
        for (double x = 0.0; x < 5.0; x += 0.05) {
            CHECK(std::abs(s.commodities[0].exit(x) - s.commodities[1].exit(x)) <= 1e-12);
            CHECK(s.commodities[2].exit(x) == 0.0);
            CHECK(std::abs(s.commodities[0].exit(x) + s.commodities[1].exit(x) - s.exit(x)) <= 1e-9);
        }
    }
    SUBCASE("entries that do not sum to the arc entry are rejected") {
        const Network net = single_arc();
        auto res = load_network(net, one_flow(net, StepFunction::constant(0.0, 1.0, 10.0)), TimeHorizon(0.0, 2.0, 6.0));
        ArcState bad = res.arcs[0];
        bad.commodities[0].entry = CumulativeCurve({0.0, 1.0}, {0.0, 3.0});
        CHECK_THROWS_AS(split_commodities(bad), std::invalid_argument);
    }
}

TEST_CASE("inverse and forward commodity forms agree") {
    // V^p(tau(t)) = U^p(t) is the forward form of the FIFO split
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 10; ++trial) {
        auto spec = testing::random_network(rng);
        const TimeHorizon hz(0.0, 2.0, 30.0);
        const auto h = testing::random_flows(rng, spec, hz);
        const Network net(spec);
        const auto res = load_network(net, h, hz);
        for (const auto& arc : res.arcs) {
            const ArcState split = split_commodities(arc);
            for (std::size_t c = 0; c < arc.commodities.size(); ++c) {
                for (double t = 0.0; t <= 2.0; t += 0.1) {
                    const double fwd = arc.commodities[c].entry(t);
                    CHECK(std::abs(arc.commodities[c].exit(arc.tau(t)) - fwd) <= 1e-9);
                    CHECK(std::abs(split.commodities[c].exit(arc.tau(t)) - fwd) <= 1e-9);
                }
            }
        }
    }
}

TEST_CASE("exit curve depends only on entry before t - beta") {
    const Arc arc{"a", "1", "2", 0.05, 1.0};
    const TimeHorizon hz(0.0, 4.0, 20.0);
    const auto full = cumulate(StepFunction({0.0, 0.7, 1.6, 3.0}, {8.0, 2.0, 15.0}), hz);
    const double cut = 2.0;
    // same curve up to `cut`, constant afterwards
    std::vector<double> t, v;
    for (std::size_t i = 0; i < full.size() && full.times()[i] < cut; ++i) {
        t.push_back(full.times()[i]);
        v.push_back(full.values()[i]);
    }
    t.push_back(cut);
    v.push_back(full(cut));
    const CumulativeCurve truncated(t, v);
    const auto a = load_arc(arc, full, hz).second;
    const auto b = load_arc(arc, truncated, hz).second;
    for (double s = 0.0; s <= cut + arc.beta; s += 0.01) CHECK(std::abs(a(s) - b(s)) <= 1e-12);
}

TEST_CASE("heavy load that outlasts the slack is flagged as truncated") {
    const Network net = single_arc(1.0, 1.0, 1000.0);
    LoadOptions opts;
    opts.max_extensions = 0;
    const auto res = load_network(net, one_flow(net, StepFunction::constant(0.0, 1.0, 1000.0)), TimeHorizon(0.0, 1.0, 2.0), opts);
    CHECK(res.truncated);
    CHECK(res.residual[0] > 0.0);
    CHECK_THROWS_AS(path_exit_time(res, net, "p", 0.9), HorizonExhausted);

    opts.max_extensions = 12;
    const auto longer = load_network(net, one_flow(net, StepFunction::constant(0.0, 1.0, 1000.0)), TimeHorizon(0.0, 1.0, 2.0), opts);
    CHECK_FALSE(longer.truncated);
    CHECK(longer.arcs[0].exit.final_value() == doctest::Approx(1000.0));
}

TEST_CASE("naive grid loader approaches the exact loader") {
    const Arc arc{"a", "1", "2", 0.01, 1.0};
    const TimeHorizon hz(0.0, 4.0, 3.0);
    const auto entry = cumulate(StepFunction::constant(0.0, 1.0, 10.0), hz);
    const auto tau = load_arc(arc, entry, hz).first;
    double prev = 0.0;
    for (int level = 0; level < 3; ++level) {
        const double dt = 0.125 / (1 << level);
        const testing::NaiveArcLoader naive(arc, entry, 0.0, 8.0, dt);
        double err = 0.0;
        for (double t = 0.0; t <= 4.0; t += dt) err = std::max(err, std::abs(naive.exit_time(t) - tau(t)));
        CHECK(err > 0.0);
        if (level > 0) CHECK(err < prev);
        prev = err;
    }
}
