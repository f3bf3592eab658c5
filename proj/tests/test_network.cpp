#include <doctest.h>

#include <numeric>

#include "dsgarm/analytic/network.hpp"
#include "support.hpp"

using namespace dsgarm;
using testsupport::make_class;
using testsupport::make_scenario;

TEST_CASE("single ABS node renewal through the group solver") {
    ChannelParams ch;
    const auto g = analytic::solve_abs_group({9}, ch, {});
    CHECK(std::abs(g.nodes[0].p_ir - 0.2) < 1e-12);
    CHECK(g.p_abs_tot == doctest::Approx(0.2));
    CHECK(g.residual <= 1e-9);
}

TEST_CASE("CSMA-only network reproduces saturation throughput") {
    for (int m : {5, 20}) {
        auto sc = make_scenario({make_class(0, Mechanism::Csma, 16)}, {m}, 0.0);
        const auto sol = analytic::solve_network(sc);
        const auto ref = testsupport::bianchi(m, sc.contention.w0, sc.contention.g);
        const auto& d = sc.channel.durations;
        const double per_slot = ref.p_tr * ref.p_s * sc.channel.payload_bits() /
                                ((1.0 - ref.p_tr) + ref.p_tr * ref.p_s * d.t_suc_cs +
                                 ref.p_tr * (1.0 - ref.p_s) * d.t_fai_cs);
        const double expect = per_slot / (sc.channel.slot_us * 1e-6);
        CAPTURE(m);
        CHECK(sol.classes[0].throughput_bps == doctest::Approx(expect).epsilon(1e-9));
        CHECK(sol.classes[0].rsv_trans_ratio == 0.0);
        CHECK(sol.nodes[0].delay_ms ==
              doctest::Approx(m * sc.channel.payload_bits() / expect * 1e3).epsilon(1e-9));
    }
}

TEST_CASE("single ABS node throughput from the period mix") {
    auto sc = make_scenario({make_class(0, Mechanism::Abs, 9)}, {1}, 1.0);
    const auto sol = analytic::solve_network(sc);
    // Reserved periods last 70 slots; unreserved ones add the mean backoff of 7.5 idle slots.
    const double tau = 2.0 / (sc.contention.w0 + 1.0);
    const double t_cs = (1.0 - tau) / tau + 70.0;
    const double t_tot = 0.2 * 70.0 + 0.8 * t_cs;
    const double cycle_s = 100.0 * t_tot * sc.channel.slot_us * 1e-6;
    CHECK(sol.rates.t_abs_tot == doctest::Approx(t_tot));
    CHECK(sol.classes[0].throughput_bps == doctest::Approx(100.0 * 12000.0 / cycle_s).epsilon(1e-9));
    CHECK(sol.classes[0].rsv_trans_ratio == doctest::Approx(0.2));
    CHECK(sol.classes[0].rsv_slot_ratio == doctest::Approx(0.2 * 70.0 / t_tot));
}

TEST_CASE("perturbed initial guesses reach the same fixed point") {
    const auto sc = reference_scenario(60);
    const auto a = analytic::solve_network(sc);
    for (double eps : {0.05, 0.2, -0.3}) {
        analytic::SolveOptions opt;
        opt.perturb = eps;
        const auto b = analytic::solve_network(sc, opt);
        for (std::size_t c = 0; c < a.classes.size(); ++c)
            CHECK(b.classes[c].throughput_bps == doctest::Approx(a.classes[c].throughput_bps).epsilon(1e-7));
    }
}

TEST_CASE("solution invariants on the reference scenario") {
    const auto sc = reference_scenario(60);
    const auto sol = analytic::solve_network(sc);
    REQUIRE(sol.classes.size() == sc.traffic_classes.size());
    double node_total = 0.0, class_total = 0.0;
    for (const auto& n : sol.nodes) node_total += n.throughput_bps;
    for (const auto& c : sol.classes) {
        class_total += c.throughput_bps;
        CHECK(c.rsv_slot_ratio >= 0.0);
        CHECK(c.rsv_slot_ratio <= 1.0);
        CHECK(c.rsv_trans_ratio >= 0.0);
        CHECK(c.rsv_trans_ratio <= 1.0);
        CHECK(std::accumulate(c.delay_pdf.begin(), c.delay_pdf.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(node_total == doctest::Approx(class_total));
    CHECK(sol.rates.p_ran > 0.0);
    CHECK(sol.rates.p_ran < 1.0);
    CHECK(sol.rates.n_abs == 42.0);
    CHECK(sol.residual <= 1e-9);
    // Less than the raw channel rate.
    CHECK(class_total < sc.channel.capacity_bps);
}

TEST_CASE("pdf mean sits near the mean delay") {
    auto sc = make_scenario({make_class(0, Mechanism::Rel, 80), make_class(1, Mechanism::Csma, 16)}, {10, 10}, 0.0);
    const auto sol = analytic::solve_network(sc);
    for (const auto& c : sol.classes) {
        double mean = 0.0;
        for (std::size_t b = 0; b < c.delay_pdf.size(); ++b) mean += (b + 0.5) * sol.pdf_bin_ms * c.delay_pdf[b];
        CHECK(mean == doctest::Approx(c.delay_ms).epsilon(0.1));
    }
}

TEST_CASE("blocking quantity derivation") {
    auto sc = reference_scenario(60);
    // 63 ms cycle over 42 ABS periods: 1.5 ms spacing.
    CHECK(analytic::blocking_quantity(sc.traffic_classes[0], sc) == 19);
    CHECK(analytic::blocking_quantity(sc.traffic_classes[1], sc) == 46);
    sc.traffic_classes[0].blocking_quantity = 7;
    CHECK(analytic::blocking_quantity(sc.traffic_classes[0], sc) == 7);
    auto tight = sc.traffic_classes[0];
    tight.blocking_quantity.reset();
    tight.l_min = 0.5;
    CHECK(analytic::blocking_quantity(tight, sc) == 1);
}

TEST_CASE("channel errors lower reserved throughput") {
    auto sc = reference_scenario(40);
    double prev = 1e300;
    for (double pe : {0.0, 0.05, 0.1, 0.2}) {
        sc.channel.p_e = pe;
        const auto sol = analytic::solve_network(checked(sc));
        const double h = sol.classes[0].throughput_bps + sol.classes[1].throughput_bps;
        CHECK(h < prev);
        prev = h;
    }
}

TEST_CASE("single-factor REL-via-CSMA term never lowers REL throughput") {
    auto sc = reference_scenario(60);
    sc.channel.p_e = 0.1;
    const auto a = analytic::solve_network(checked(sc));
    sc.model.rel_csma_double_factor = false;
    const auto b = analytic::solve_network(checked(sc));
    for (std::size_t c = 2; c <= 4; ++c) CHECK(b.classes[c].throughput_bps >= a.classes[c].throughput_bps);
}

TEST_CASE("more REL nodes raise the reserved share of RAN transmissions") {
    const std::vector<TrafficClass> cls = {make_class(0, Mechanism::Rel, 80), make_class(1, Mechanism::Csma, 16)};
    const auto base = make_scenario(cls, {5, 10}, 0.0);
    const auto more = make_scenario(cls, {15, 10}, 0.0);
    CHECK(analytic::solve_network(more).rates.p_rel_rsv > analytic::solve_network(base).rates.p_rel_rsv);
}
