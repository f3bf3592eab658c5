#include "dsgarm/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include "dsgarm/analytic/network.hpp"
#include "dsgarm/sim/simulator.hpp"

namespace dsgarm::metrics {

UtilityParams UtilityParams::from_bounds(double l_min, double l_max) {
    if (!(l_max > l_min)) throw std::invalid_argument("UtilityParams: l_min must be below l_max");
    const double span = l_max - l_min;
    return {l_min, l_max, -std::log(1e-3) / (span * span)};
}

double delay_utility(double t, const UtilityParams& p) {
    if (t < p.l_min) return 1.0;
    if (t > p.l_max) return 0.0;
    const double x = t - p.l_max;
    return 1.0 - std::exp(-p.k_util * x * x);
}

double class_utility(const TrafficClass& tc, double delay_ms) {
    if (!tc.real_time) return 1.0;
    if (!std::isfinite(delay_ms)) return 0.0;
    return delay_utility(delay_ms, UtilityParams::from_bounds(tc.l_min, tc.l_max));
}

double wadu(std::span<const double> u, std::span<const double> w, const std::vector<bool>& rt) {
    if (u.size() != w.size() || u.size() != rt.size()) throw std::invalid_argument("wadu: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (rt[i]) {
            num += w[i] * u[i];
            den += w[i];
        }
    if (!(den > 0.0)) throw std::invalid_argument("wadu: no real-time class");
    return num / den;
}

double uwt(std::span<const double> u, std::span<const double> w, std::span<const double> h) {
    if (u.size() != w.size() || u.size() != h.size()) throw std::invalid_argument("uwt: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += w[i] * u[i] * h[i];
    return s;
}

std::vector<double> delay_pdf(std::span<const double> samples, double bin_ms, std::size_t bins) {
    if (samples.empty()) throw EmptySamples();
    if (!(bin_ms > 0.0)) throw std::invalid_argument("delay_pdf: bin width must be positive");
    std::size_t n = bins;
    if (n == 0) {
        const double hi = *std::max_element(samples.begin(), samples.end());
        n = static_cast<std::size_t>(std::max(0.0, hi) / bin_ms) + 1;
    }
    std::vector<double> h(n, 0.0);
    for (double s : samples) {
        const std::size_t b = s <= 0.0 ? 0 : static_cast<std::size_t>(s / bin_ms);
        h[std::min(b, n - 1)] += 1.0;
    }
    for (double& v : h) v /= static_cast<double>(samples.size());
    return h;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = std::max(a.size(), b.size());
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::abs((i < a.size() ? a[i] : 0.0) - (i < b.size() ? b[i] : 0.0));
    return 0.5 * s;
}

double sample_variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / x.size();
    double s = 0.0;
    for (double v : x) s += (v - mean) * (v - mean);
    return s / (x.size() - 1);
}

double quantize(double x) {
    if (!std::isfinite(x) || x == 0.0) return x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return std::strtod(buf, nullptr);
}

namespace {

void quantize_all(Summary& s) {
    for (auto& c : s.classes) {
        for (double* v : {&c.throughput_bps, &c.delay_ms, &c.rsv_slot_ratio, &c.rsv_trans_ratio, &c.p_blocking})
            *v = quantize(*v);
        for (double& v : c.delay_pdf) v = quantize(v);
    }
    for (auto& n : s.nodes)
        for (double* v : {&n.throughput_bps, &n.delay_ms, &n.rsv_slot_ratio, &n.rsv_trans_ratio, &n.p_blocking})
            *v = quantize(*v);
    s.convergence_s = quantize(s.convergence_s);
}

}  // namespace

Summary summarize(const Scenario& sc, const analytic::AnalyticSolution& sol) {
    Summary s;
    s.pdf_bin_ms = sol.pdf_bin_ms;
    for (const auto& c : sol.classes)
        s.classes.push_back({c.class_id, c.mechanism, c.nodes, c.throughput_bps, c.delay_ms, c.rsv_slot_ratio,
                             c.rsv_trans_ratio, c.p_blocking, 0, c.delay_pdf});
    for (const auto& n : sol.nodes)
        s.nodes.push_back({n.node, sc.traffic_classes[n.class_index].id, n.throughput_bps, n.delay_ms,
                           n.rsv_slot_ratio, n.rsv_trans_ratio, n.p_blocking, 0});
    quantize_all(s);
    return s;
}

Summary summarize(const Scenario& sc, const sim::SimResult& res, double range_ms, double bin_ms) {
    Summary s;
    s.simulated = true;
    s.pdf_bin_ms = bin_ms;
    s.convergence_s = res.convergence_s;
    const double seconds = res.total_slots * sc.channel.slot_us * 1e-6;
    const double bits = sc.channel.payload_bits();
    const std::size_t bins = static_cast<std::size_t>(std::ceil(range_ms / bin_ms));

    for (const auto& n : res.nodes) {
        NodeMetrics nm;
        nm.node = n.node;
        nm.class_id = sc.traffic_classes[n.class_index].id;
        nm.throughput_bps = seconds > 0.0 ? n.successes * bits / seconds : 0.0;
        nm.delay_ms = n.delays_ms.empty() ? std::numeric_limits<double>::infinity()
                                          : std::accumulate(n.delays_ms.begin(), n.delays_ms.end(), 0.0) /
                                                n.delays_ms.size();
        if (n.mechanism == Mechanism::Abs) {
            if (res.abs.periods > 0) nm.rsv_trans_ratio = static_cast<double>(n.rsv_tx) / res.abs.periods;
            if (res.abs.slots > 0) nm.rsv_slot_ratio = static_cast<double>(n.rsv_slots) / res.abs.slots;
        } else if (n.mechanism == Mechanism::Rel) {
            if (res.ran.tx_events > 0) nm.rsv_trans_ratio = static_cast<double>(n.rsv_tx) / res.ran.tx_events;
            if (res.ran.slots > 0) nm.rsv_slot_ratio = static_cast<double>(n.rsv_slots) / res.ran.slots;
        }
        nm.p_blocking = n.selections > 0 ? static_cast<double>(n.blocked) / n.selections : 0.0;
        nm.collisions = n.collisions;
        s.nodes.push_back(nm);
    }
    for (std::size_t c = 0; c < sc.traffic_classes.size(); ++c) {
        ClassMetrics cm;
        cm.class_id = sc.traffic_classes[c].id;
        cm.mechanism = sc.traffic_classes[c].mechanism;
        std::vector<double> pooled;
        for (std::size_t k = 0; k < res.nodes.size(); ++k) {
            if (res.nodes[k].class_index != static_cast<int>(c)) continue;
            const auto& nm = s.nodes[k];
            ++cm.nodes;
            cm.throughput_bps += nm.throughput_bps;
            cm.delay_ms += nm.delay_ms;
            cm.rsv_slot_ratio += nm.rsv_slot_ratio;
            cm.rsv_trans_ratio += nm.rsv_trans_ratio;
            cm.p_blocking += nm.p_blocking;
            cm.collisions += nm.collisions;
            pooled.insert(pooled.end(), res.nodes[k].delays_ms.begin(), res.nodes[k].delays_ms.end());
        }
        if (cm.nodes > 0) {
            cm.delay_ms /= cm.nodes;
            cm.p_blocking /= cm.nodes;
        }
        cm.delay_pdf = pooled.empty() ? std::vector<double>(bins, 0.0) : delay_pdf(pooled, bin_ms, bins);
        s.classes.push_back(std::move(cm));
    }
    quantize_all(s);
    return s;
}

double summary_wadu(const Scenario& sc, const Summary& s) {
    std::vector<double> u, w;
    std::vector<bool> rt;
    for (std::size_t c = 0; c < s.classes.size(); ++c) {
        const auto& tc = sc.traffic_classes[c];
        if (s.classes[c].nodes == 0) continue;
        u.push_back(class_utility(tc, s.classes[c].delay_ms));
        w.push_back(tc.alpha);
        rt.push_back(tc.real_time);
    }
    return wadu(u, w, rt);
}

double summary_uwt(const Scenario& sc, const Summary& s) {
    std::vector<double> u, w, h;
    for (std::size_t c = 0; c < s.classes.size(); ++c) {
        const auto& tc = sc.traffic_classes[c];
        u.push_back(class_utility(tc, s.classes[c].delay_ms));
        w.push_back(tc.alpha);
        h.push_back(s.classes[c].throughput_bps);
    }
    return uwt(u, w, h);
}

}  // namespace dsgarm::metrics
