#pragma once

// Independent reference computations and scenario builders shared by the tests.

#include <cmath>
#include <vector>

#include "dsgarm/core/scenario.hpp"

namespace testsupport {

struct DcfPoint {
    double tau;
    double p;
    double p_tr;
    double p_s;
};

// Saturated DCF with n stations, minimum window w, m doubling stages and no
// retry limit; closed-form tau(p) solved by bisection on tau.
inline DcfPoint bianchi(int n, int w, int m) {
    auto tau_of_p = [&](double p) {
        const double q = 1.0 - 2.0 * p;
        if (std::abs(q) < 1e-12) {
            // limit p -> 0.5
            return 2.0 / (w + 1.0 + 0.5 * w * m);
        }
        return 2.0 * q / (q * (w + 1.0) + p * w * (1.0 - std::pow(2.0 * p, m)));
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double t = 0.5 * (lo + hi);
        const double p = 1.0 - std::pow(1.0 - t, n - 1);
        if (tau_of_p(p) > t) lo = t;
        else hi = t;
    }
    const double tau = 0.5 * (lo + hi);
    const double p = 1.0 - std::pow(1.0 - tau, n - 1);
    const double p_tr = 1.0 - std::pow(1.0 - tau, n);
    const double p_s = n * tau * std::pow(1.0 - tau, n - 1) / p_tr;
    return {tau, p, p_tr, p_s};
}

inline double binomial_pmf(int n, int k, double q) {
    return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)) * std::pow(q, k) *
           std::pow(1.0 - q, n - k);
}

inline dsgarm::TrafficClass make_class(int id, dsgarm::Mechanism m, int window, double l_min = 1000.0,
                                       double l_max = 2000.0, double alpha = 1.0) {
    dsgarm::TrafficClass t;
    t.id = id;
    t.alpha = alpha;
    t.l_min = l_min;
    t.l_max = l_max;
    t.mechanism = m;
    t.window = window;
    t.real_time = m == dsgarm::Mechanism::Abs;
    return t;
}

inline dsgarm::Scenario make_scenario(std::vector<dsgarm::TrafficClass> classes, std::vector<int> mix,
                                      double eps_abs, long long sim_slots = 1'000'000, unsigned long long seed = 1) {
    dsgarm::Scenario sc;
    sc.name = "test";
    sc.traffic_classes = std::move(classes);
    sc.class_mix = std::move(mix);
    sc.layout.eps_abs = eps_abs;
    sc.layout.eps_abs_max = std::max(sc.layout.eps_abs_max, eps_abs);
    sc.channel.durations = dsgarm::default_durations(sc.channel.capacity_bps, sc.channel.payload_bytes,
                                                      sc.channel.slot_us);
    sc.population = dsgarm::derive_population(sc.traffic_classes, sc.class_mix);
    sc.sim_slots = sim_slots;
    sc.seed = seed;
    return dsgarm::checked(sc);
}

}  // namespace testsupport
