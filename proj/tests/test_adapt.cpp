#include <doctest.h>

#include "dsgarm/adapt/adapt.hpp"
#include "dsgarm/analytic/network.hpp"
#include "support.hpp"

using namespace dsgarm;

namespace {

std::vector<double> alphas(const Scenario& sc) {
    std::vector<double> w;
    for (const auto& tc : sc.traffic_classes) w.push_back(tc.alpha);
    return w;
}

}  // namespace

TEST_CASE("window search lands on the ABS target") {
    const auto sc = reference_scenario(60);
    for (double target : {0.3, 0.4, 0.5}) {
        const auto ch = adapt::change_reservation_window(alphas(sc), target, Mechanism::Abs, sc);
        CAPTURE(target);
        CHECK(std::abs(ch.achieved_ratio - target) <= 0.01 + 1e-12);
        // Heavier classes get smaller windows.
        CHECK(ch.windows[0] <= ch.windows[1]);
        CHECK(ch.windows[0] >= sc.adapt.n_min);
        CHECK(ch.windows[1] <= sc.adapt.n_max);
    }
}

TEST_CASE("window search lands on the REL target") {
    const auto sc = reference_scenario(60);
    const auto ch = adapt::change_reservation_window(alphas(sc), sc.layout.eps_rel, Mechanism::Rel, sc);
    CHECK(std::abs(ch.achieved_ratio - sc.layout.eps_rel) <= 0.01 + 1e-12);
    CHECK(ch.windows[2] <= ch.windows[3]);
    CHECK(ch.windows[3] <= ch.windows[4]);
}

TEST_CASE("unreachable targets report the bracket") {
    // One node with window n reserves 2/(n+1) of the periods at most.
    const auto sc = testsupport::make_scenario({testsupport::make_class(0, Mechanism::Abs, 20)}, {1}, 0.42);
    try {
        adapt::change_reservation_window(alphas(sc), 0.9, Mechanism::Abs, sc);
        FAIL("expected TargetUnreachable");
    } catch (const adapt::TargetUnreachable& e) {
        CHECK(e.highest() == doctest::Approx(2.0 / (sc.adapt.n_min + 1)));
        CHECK(e.lowest() <= e.highest());
        CHECK_FALSE(e.closest().windows.empty());
    }
    CHECK_THROWS_AS(adapt::change_reservation_window(alphas(sc), 1.5, Mechanism::Abs, sc), std::invalid_argument);
}

TEST_CASE("adaptation meets the delay guarantee on the reference scenario") {
    const auto sc = reference_scenario(60);
    const auto r = adapt::adapt_parameters(sc);
    CHECK_FALSE(r.infeasible);
    CHECK(r.failing_classes.empty());
    std::vector<int> offending;
    CHECK(adapt::audit(sc, r, &offending));
    CHECK(offending.empty());
    for (std::size_t c = 0; c < sc.traffic_classes.size(); ++c) {
        const auto& tc = sc.traffic_classes[c];
        if (tc.mechanism == Mechanism::Abs) {
            CHECK(r.n_abs[c] >= sc.adapt.n_min);
            CHECK(r.n_rel[c] == 0);
            if (!r.fallback_used) CHECK(r.predicted_delays[c] <= sc.adapt.lambda * tc.l_min + 1e-9);
            CHECK(r.blocking[c] <= sc.adapt.th_bk);
        } else if (tc.mechanism == Mechanism::Rel) {
            CHECK(r.n_rel[c] >= sc.adapt.n_min);
            CHECK(r.n_abs[c] == 0);
        }
    }
    CHECK(std::abs(r.rel_ratio - sc.layout.eps_rel) <= 0.01 + 1e-12);
}

TEST_CASE("apply writes windows and weights into the scenario") {
    const auto sc = reference_scenario(60);
    const auto r = adapt::adapt_parameters(sc);
    const auto out = adapt::apply(sc, r);
    CHECK(validate_scenario(out).ok());
    const auto specs = node_specs(out);
    for (const auto& s : specs) {
        if (s.mechanism == Mechanism::Abs) CHECK(s.window == r.n_abs[s.class_index]);
        if (s.mechanism == Mechanism::Rel) CHECK(s.window == r.n_rel[s.class_index]);
    }
    const auto sol = analytic::solve_network(out);
    for (std::size_t c = 0; c < 2; ++c)
        CHECK(sol.classes[c].delay_ms == doctest::Approx(r.predicted_delays[c]).epsilon(1e-6));
}

TEST_CASE("impossible delay bounds fall back and are flagged") {
    auto sc = reference_scenario(60);
    sc.traffic_classes[0].l_min = 0.2;
    sc.traffic_classes[0].l_max = 0.4;
    sc = checked(sc);
    const auto r = adapt::adapt_parameters(sc);
    CHECK(r.fallback_used);
    CHECK(r.infeasible);
    CHECK_FALSE(r.failing_classes.empty());
    CHECK(adapt::audit(sc, r));
}
