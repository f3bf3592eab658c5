#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "dsgarm/analytic/network.hpp"
#include "dsgarm/metrics/metrics.hpp"
#include "dsgarm/sim/simulator.hpp"
#include "support.hpp"

using namespace dsgarm;
using namespace dsgarm::metrics;

TEST_CASE("utility endpoints and shape") {
    const auto p = UtilityParams::from_bounds(34.0, 68.0);
    CHECK(p.k_util == doctest::Approx(-std::log(1e-3) / (34.0 * 34.0)));
    CHECK(delay_utility(0.0, p) == 1.0);
    CHECK(delay_utility(33.999, p) == 1.0);
    CHECK(delay_utility(34.0, p) == doctest::Approx(1.0 - 1e-3));
    CHECK(delay_utility(68.0, p) == 0.0);
    CHECK(delay_utility(68.001, p) == 0.0);
    double prev = 1.0;
    for (int i = 0; i <= 10000; ++i) {
        const double u = delay_utility(30.0 + 0.005 * i, p);
        CHECK(u <= prev + 1e-12);
        CHECK(u >= 0.0);
        prev = u;
    }
    CHECK_THROWS_AS(UtilityParams::from_bounds(5.0, 5.0), std::invalid_argument);
}

TEST_CASE("class utility") {
    auto tc = testsupport::make_class(0, Mechanism::Abs, 10, 10.0, 20.0);
    CHECK(class_utility(tc, 5.0) == 1.0);
    CHECK(class_utility(tc, std::numeric_limits<double>::infinity()) == 0.0);
    tc.real_time = false;
    CHECK(class_utility(tc, 1e9) == 1.0);
}

TEST_CASE("WADU and UWT by hand") {
    const std::vector<double> u = {1.0, 0.5, 0.2};
    const std::vector<double> w = {2.0, 1.0, 4.0};
    const std::vector<bool> rt = {true, true, false};
    CHECK(wadu(u, w, rt) == doctest::Approx(2.5 / 3.0));
    const std::vector<double> h = {10.0, 20.0, 30.0};
    CHECK(uwt(u, w, h) == doctest::Approx(20.0 + 10.0 + 24.0));
    CHECK_THROWS_AS(wadu(u, w, std::vector<bool>{false, false, false}), std::invalid_argument);
}

TEST_CASE("delay histogram") {
    const std::vector<double> s = {0.2, 0.7, 1.5, 2.0, 9.0};
    const auto h = delay_pdf(s, 1.0, 4);
    REQUIRE(h.size() == 4u);
    CHECK(h[0] == doctest::Approx(0.4));
    CHECK(h[1] == doctest::Approx(0.2));
    CHECK(h[2] == doctest::Approx(0.2));
    CHECK(h[3] == doctest::Approx(0.2));
    const auto full = delay_pdf(s, 0.5);
    CHECK(full.size() == 19u);
    CHECK(std::accumulate(full.begin(), full.end(), 0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(delay_pdf(std::vector<double>{}, 1.0), EmptySamples);
}

TEST_CASE("total variation and variance") {
    const std::vector<double> a = {0.5, 0.5}, b = {1.0};
    CHECK(total_variation(a, b) == doctest::Approx(0.5));
    const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    CHECK(sample_variance(x) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("quantize keeps nine significant digits") {
    CHECK(quantize(1.23456789012) == 1.23456789);
    CHECK(quantize(quantize(12345.6789123)) == quantize(12345.6789123));
    CHECK(quantize(0.0) == 0.0);
    CHECK(std::isinf(quantize(std::numeric_limits<double>::infinity())));
}

TEST_CASE("analytic summary keeps class and node rows") {
    const auto sc = reference_scenario(30);
    const auto sol = analytic::solve_network(sc);
    const auto s = summarize(sc, sol);
    CHECK(s.classes.size() == sc.traffic_classes.size());
    CHECK(s.nodes.size() == 30u);
    CHECK_FALSE(s.simulated);
    for (std::size_t c = 0; c < s.classes.size(); ++c)
        CHECK(s.classes[c].throughput_bps == doctest::Approx(sol.classes[c].throughput_bps).epsilon(1e-8));
    const double w = summary_wadu(sc, s);
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
    CHECK(summary_uwt(sc, s) > 0.0);
}

TEST_CASE("simulated summary aggregates nodes") {
    auto sc = reference_scenario(20);
    sc.sim_slots = 300000;
    sc = checked(sc);
    const auto r = sim::run_simulation(sc);
    const auto s = summarize(sc, r, 200.0);
    double node_sum = 0.0, class_sum = 0.0;
    for (const auto& n : s.nodes) node_sum += n.throughput_bps;
    for (const auto& c : s.classes) {
        class_sum += c.throughput_bps;
        CHECK(c.delay_pdf.size() == 200u);
        if (c.nodes > 0) CHECK(std::accumulate(c.delay_pdf.begin(), c.delay_pdf.end(), 0.0) == doctest::Approx(1.0));
    }
    CHECK(class_sum == doctest::Approx(node_sum).epsilon(1e-8));
    CHECK(s.simulated);
}
