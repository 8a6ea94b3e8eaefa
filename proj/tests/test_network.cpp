#include <map>

#include "doctest.h"
#include "ldm/network.hpp"

using namespace ldm;

namespace {

NetworkSpec minimal() {
    return {{"1", "2"}, {{"a", "1", "2", 0.01, 1.0}}, {{"p", {"1", "2"}, {"a"}}}, {{{"1", "2"}, 10.0}}};
}

NetworkSpec diamond() {
    return {{"1", "2", "3", "4"},
            {{"a1", "1", "2", 0.01, 1.0}, {"a2", "1", "3", 0.01, 1.5}, {"a3", "2", "4", 0.02, 1.0},
             {"a4", "3", "2", 0.0, 0.5}},
            {{"p1", {"1", "4"}, {"a1", "a3"}}, {"p2", {"1", "4"}, {"a2", "a4", "a3"}}},
            {{{"1", "4"}, 10.0}}};
}

}  // namespace

TEST_CASE("validate_network") {
    CHECK(validate(minimal()).issues.empty());

    auto zero_beta = minimal();
    zero_beta.arcs[0].beta = 0.0;
    CHECK(validate(zero_beta).mentions("beta must be strictly positive"));

    auto neg_alpha = minimal();
    neg_alpha.arcs[0].alpha = -0.1;
    CHECK(validate(neg_alpha).mentions("alpha must be nonnegative"));

    auto broken = diamond();
    broken.paths[1].arcs = {"a2", "a3"};
    const auto r = validate(broken);
    CHECK_FALSE(r.ok());
    CHECK(r.mentions("not connected head-to-tail"));
    CHECK(r.mentions("p2"));

    auto orphan = minimal();
    orphan.trips.push_back({{"2", "1"}, 3.0});
    CHECK(validate(orphan).mentions("no path connects"));

    auto missing = minimal();
    missing.paths[0].arcs = {"zz"};
    CHECK(validate(missing).mentions("unknown arc zz"));

    CHECK_THROWS_AS(Network{zero_beta}, std::invalid_argument);
}

TEST_CASE("validation is idempotent and node revisits only warn") {
    NetworkSpec loop{{"1", "2"},
                     {{"f", "1", "2", 0.01, 1.0}, {"b", "2", "1", 0.01, 1.0}},
                     {{"p", {"1", "2"}, {"f", "b", "f"}}},
                     {{{"1", "2"}, 1.0}}};
    const auto r1 = validate(loop);
    const auto r2 = validate(loop);
    CHECK(r1.ok());
    CHECK(r1.warnings().size() == 1);
    CHECK(r1.to_string() == r2.to_string());
    const Network net(loop);
    CHECK(net.upstream_arcs("f") == std::set<std::string>{"b"});
}

TEST_CASE("incidence and arc volume aggregation") {
    const Network net(diamond());
    CHECK(net.incidence("a1", "p1") == 1);
    CHECK(net.incidence("a2", "p1") == 0);
    CHECK(net.incidence("a3", "p2") == 1);
    CHECK_THROWS_AS(net.incidence("zz", "p1"), UnknownId);
    CHECK_THROWS_WITH_AS(net.incidence("a1", "nope"), "unknown path id: nope", UnknownId);

    // x_a = sum_p delta_ap x_a^p against a direct per-arc sum over path memberships
    const std::map<std::string, double> per_path{{"p1", 3.0}, {"p2", 5.0}};
    for (const auto& a : net.arcs()) {
        double via_incidence = 0.0;
        for (const auto& p : net.paths()) via_incidence += net.incidence(a.id, p.id) * per_path.at(p.id);
        double direct = 0.0;
        for (const auto& p : net.paths()) {
            for (const auto& x : p.arcs) {
                if (x == a.id) direct += per_path.at(p.id);
            }
        }
        CHECK(via_incidence == direct);
    }
}

TEST_CASE("upstream_arcs") {
    const Network net(diamond());
    CHECK(net.upstream_arcs("a3") == std::set<std::string>{"a1", "a4"});
    CHECK(net.upstream_arcs("a4") == std::set<std::string>{"a2"});
    CHECK(net.upstream_arcs("a1").empty());
    CHECK(net.upstream_arcs("a2").empty());
    CHECK_THROWS_AS(net.upstream_arcs("zz"), UnknownId);

    // consistency with consecutive pairs along paths
    for (const auto& a : net.arcs()) {
        for (const auto& b : net.arcs()) {
            bool consecutive = false;
            for (const auto& p : net.paths()) {
                for (std::size_t k = 1; k < p.arcs.size(); ++k) consecutive |= p.arcs[k - 1] == b.id && p.arcs[k] == a.id;
            }
            CHECK(net.upstream_arcs(a.id).count(b.id) == (consecutive ? 1u : 0u));
        }
    }
}

TEST_CASE("two paths merging into one arc") {
    const Network net({{"1", "2", "3"},
                       {{"a1", "1", "2", 0.0, 1.0}, {"a2", "1", "2", 0.0, 1.0}, {"a3", "2", "3", 0.0, 1.0}},
                       {{"p", {"1", "3"}, {"a1", "a3"}}, {"q", {"1", "3"}, {"a2", "a3"}}},
                       {{{"1", "3"}, 1.0}}});
    CHECK(net.upstream_arcs("a3") == std::set<std::string>{"a1", "a2"});
    CHECK(net.od_paths(0) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("network JSON uses the documented field names") {
    const auto j = to_json(diamond());
    CHECK(j.at("arcs").at(0).at("alpha").get<double>() == 0.01);
    CHECK(j.at("paths").at(1).at("od").at(1).get<std::string>() == "4");
    CHECK(j.at("trips").at(0).at("q").get<double>() == 10.0);
    const auto back = network_spec_from_json(j);
    CHECK(to_json(back) == j);
}
