#include "doctest.h"
#include "test_support.hpp"

#include "mndt/demand.hpp"

#include <algorithm>
#include <sstream>

using namespace mndt::demand;

TEST_CASE("pattern library") {
    const DemandPatternSet flat = build_pattern_library(1, 1);
    REQUIRE(flat.size() == 1);
    CHECK(std::all_of(flat[0].mean_bps.begin(), flat[0].mean_bps.end(),
                      [&](double v) { return v == flat[0].mean_bps[0]; }));

    const DemandPatternSet lib = build_pattern_library(7, 5);
    REQUIRE(lib.size() == 5);
    CHECK(lib[1].name == "office");
    const auto& office = lib[1].mean_bps;
    const auto peak = std::max_element(office.begin(), office.end()) - office.begin();
    CHECK(peak >= 18);
    CHECK(peak < 36);
    double inside = 0.0, outside = 0.0;
    for (int s = 0; s < kSlotsPerDay; ++s) (s >= 18 && s < 36 ? inside : outside) += office[std::size_t(s)];
    CHECK(inside / 18.0 > 5.0 * outside / 30.0);

    const DemandPatternSet again = build_pattern_library(7, 5);
    for (std::size_t k = 0; k < 5; ++k) CHECK(lib[k].mean_bps == again[k].mean_bps);
    for (std::size_t a = 0; a < lib.size(); ++a) {
        for (double v : lib[a].mean_bps) CHECK(v >= 0.0);
        for (std::size_t b = a + 1; b < lib.size(); ++b) CHECK(lib[a].mean_bps != lib[b].mean_bps);
    }
    CHECK(build_pattern_library(7, 12).size() == 12);
    CHECK_THROWS_AS(build_pattern_library(7, 0), std::invalid_argument);
}

TEST_CASE("per-step demand") {
    DemandPatternSet zero;
    zero.patterns.push_back({"zero", {}});
    std::mt19937_64 gen(3);
    UserDemandProcess p;
    CHECK(sample_demand(p, zero, 10, 1.0, gen) == 0.0);
    CHECK_THROWS_AS(sample_demand(p, zero, 48, 1.0, gen), std::out_of_range);
    p.cluster = 1;
    CHECK_THROWS_AS(sample_demand(p, zero, 0, 1.0, gen), std::out_of_range);

    // very large dispersion: sample mean converges to the pattern mean
    const DemandPatternSet flat = build_pattern_library(1, 1);
    UserDemandProcess steady;
    steady.stay_normal = 1.0;
    steady.dispersion = 1e4;
    const int n = 100000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += sample_demand(steady, flat, 5, 2.0, gen);
        CHECK(steady.mode == DemandMode::Normal);
    }
    CHECK(std::abs(sum / n - 2.0 * flat[0].mean_bps[5]) <= 0.02 * 2.0 * flat[0].mean_bps[5]);

    // default chain: stationary burst share is 0.05 / (0.05 + 0.2) = 0.2
    UserDemandProcess chain;
    int bursts = 0;
    std::vector<double> draws;
    for (int i = 0; i < n; ++i) {
        const double d = sample_demand(chain, flat, 0, 1.0, gen);
        CHECK(d >= 0.0);
        bursts += chain.mode == DemandMode::Burst;
        draws.push_back(d);
    }
    CHECK(double(bursts) / n == doctest::Approx(0.2).epsilon(0.05));
    // mean: 0.8 m + 0.2 * 3 m = 1.4 m
    CHECK(mndt::testing::mean(draws) == doctest::Approx(1.4 * flat[0].mean_bps[0]).epsilon(0.03));
}

TEST_CASE("burst multiplier 1 makes the regimes indistinguishable") {
    const DemandPatternSet flat = build_pattern_library(1, 1);
    std::mt19937_64 ga(5), gb(6);
    UserDemandProcess normal;
    normal.stay_normal = 1.0;
    UserDemandProcess switching;
    switching.burst_multiplier = 1.0;
    std::vector<double> a, b;
    for (int i = 0; i < 20000; ++i) {
        a.push_back(sample_demand(normal, flat, 0, 1.0, ga));
        b.push_back(sample_demand(switching, flat, 0, 1.0, gb));
    }
    CHECK(mndt::testing::ks_statistic(a, b) < mndt::testing::ks_critical(a.size(), b.size(), 0.01));
}

TEST_CASE("process validation and cluster assignment") {
    UserDemandProcess p;
    CHECK_NOTHROW(p.check());
    p.burst_multiplier = 0.5;
    CHECK_THROWS(p.check());
    p = {};
    p.dispersion = 0.0;
    CHECK_THROWS(p.check());
    p = {};
    p.stay_normal = 1.5;
    CHECK_THROWS(p.check());

    std::vector<int> per_cluster(5, 0);
    for (int u = 0; u < 5000; ++u) {
        const UserDemandProcess q = make_user_process(4, u, 5);
        CHECK(q.user == u);
        REQUIRE(q.cluster >= 0);
        REQUIRE(q.cluster < 5);
        CHECK(q.cluster == make_user_process(4, u, 5).cluster);
        ++per_cluster[std::size_t(q.cluster)];
    }
    for (int c : per_cluster) CHECK(c > 800);
    CHECK_THROWS(make_user_process(4, 0, 0));
}

TEST_CASE("uniform episode demand") {
    const double b = 1.8e5;
    const auto d = sample_episode_demand(9, 8000, b);
    REQUIRE(d.size() == 8000);
    double sum = 0.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(d[i].user == int(i));
        CHECK(d[i].total_bits >= 0.0);
        CHECK(d[i].total_bits <= 60.0 * b);
        sum += d[i].total_bits;
    }
    CHECK(std::abs(sum / 8000.0 - 30.0 * b) <= 0.03 * 30.0 * b);
    const auto again = sample_episode_demand(9, 8000, b);
    for (std::size_t i = 0; i < d.size(); ++i) CHECK(d[i].total_bits == again[i].total_bits);
}

TEST_CASE("hierarchical episode demand and trace") {
    const DemandPatternSet lib = build_pattern_library(2, 5);
    const auto a = sample_hierarchical_episode_demand(3, 50, lib, 8 * 3600.0, 20, 1.0);
    const auto b = sample_hierarchical_episode_demand(3, 50, lib, 8 * 3600.0, 20, 1.0);
    REQUIRE(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].total_bits == b[i].total_bits);
        CHECK(a[i].total_bits > 0.0);
    }

    std::ostringstream trace;
    write_demand_trace(trace, 3, 4, lib, 8 * 3600.0, 5, 1.0);
    std::istringstream in(trace.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "t,user_id,demand_bits");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 20);
}
