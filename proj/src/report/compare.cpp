#include <cmath>
#include <ostream>
#include <sstream>

#include "dsgarm/core/scenario.hpp"
#include "dsgarm/report/report.hpp"

namespace dsgarm::report {

std::string_view cross_validation_header() {
    return "scenario,class_id,metric,analytic,simulated,abs_error,rel_error,tolerance,pass";
}

namespace {

CompareRow make_row(const std::string& scenario, int cls, const char* metric, double a, double s, double tol,
                    bool relative) {
    CompareRow r{scenario, cls, metric, a, s, 0.0, 0.0, tol, relative, true};
    if (std::isinf(a) || std::isinf(s)) {
        r.pass = std::isinf(a) && std::isinf(s);
        r.abs_error = r.pass ? 0.0 : std::numeric_limits<double>::infinity();
        r.rel_error = r.abs_error;
        return r;
    }
    r.abs_error = std::abs(s - a);
    r.rel_error = a != 0.0 ? r.abs_error / std::abs(a) : (r.abs_error == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    r.pass = relative ? r.rel_error <= tol : r.abs_error <= tol;
    return r;
}

}  // namespace

std::vector<CompareRow> compare(const std::string& scenario, const metrics::Summary& an, const metrics::Summary& sim,
                                const Tolerances& tol) {
    std::vector<CompareRow> rows;
    for (const auto& a : an.classes) {
        if (a.nodes == 0) continue;
        const metrics::ClassMetrics* s = nullptr;
        for (const auto& c : sim.classes)
            if (c.class_id == a.class_id) s = &c;
        if (!s) throw std::invalid_argument("compare: class " + std::to_string(a.class_id) + " missing in simulation");
        rows.push_back(make_row(scenario, a.class_id, "throughput_bps", a.throughput_bps, s->throughput_bps,
                                tol.throughput_rel, true));
        rows.push_back(make_row(scenario, a.class_id, "delay_ms", a.delay_ms, s->delay_ms, tol.delay_rel, true));
        rows.push_back(make_row(scenario, a.class_id, "rsv_trans_ratio", a.rsv_trans_ratio, s->rsv_trans_ratio,
                                tol.ratio_abs, false));
        rows.push_back(make_row(scenario, a.class_id, "rsv_slot_ratio", a.rsv_slot_ratio, s->rsv_slot_ratio,
                                tol.ratio_abs, false));
    }
    return rows;
}

void write_compare_csv(std::ostream& os, const std::vector<CompareRow>& rows, bool header) {
    if (header) os << cross_validation_header() << '\n';
    for (const auto& r : rows)
        os << r.scenario << ',' << r.class_id << ',' << r.metric << ',' << format_number(r.analytic) << ','
           << format_number(r.simulated) << ',' << format_number(r.abs_error) << ',' << format_number(r.rel_error)
           << ',' << format_number(r.tolerance) << ',' << (r.pass ? 1 : 0) << '\n';
}

namespace {

std::vector<double> parse_list(const std::string& key, const std::string& list) {
    std::vector<std::string> items;
    std::stringstream ss(list);
    for (std::string item; std::getline(ss, item, ',');) items.push_back(item);
    auto num = [&](const std::string& t) {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != t.size()) throw std::invalid_argument("sweep " + key + ": bad value '" + t + "'");
        return v;
    };
    std::vector<double> out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i] != "...") {
            out.push_back(num(items[i]));
            continue;
        }
        if (out.size() < 2 || i + 1 >= items.size())
            throw std::invalid_argument("sweep " + key + ": '...' needs two leading values and an end value");
        const double step = out[out.size() - 1] - out[out.size() - 2];
        const double end = num(items[++i]);
        if (!(step > 0.0) || end < out.back()) throw std::invalid_argument("sweep " + key + ": bad range");
        for (double v = out.back() + step; v <= end + 1e-9 * std::abs(step); v += step) out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("sweep " + key + ": empty list");
    return out;
}

}  // namespace

std::vector<SweepPoint> expand_sweeps(const std::vector<std::string>& specs) {
    std::vector<SweepPoint> points{SweepPoint{}};
    for (const auto& spec : specs) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos || eq == 0) throw std::invalid_argument("sweep: expected key=list, got '" + spec + "'");
        const std::string key = spec.substr(0, eq);
        const auto values = parse_list(key, spec.substr(eq + 1));
        std::vector<SweepPoint> next;
        for (const auto& p : points)
            for (double v : values) {
                auto q = p;
                q.emplace_back(key, v);
                next.push_back(std::move(q));
            }
        points = std::move(next);
    }
    return points;
}

Scenario apply_point(const Scenario& sc, const SweepPoint& p) {
    Scenario out = sc;
    for (const auto& [key, v] : p) {
        const int iv = static_cast<int>(std::lround(v));
        if (key == "nodes") {
            out = with_node_count(out, iv);
        } else if (key == "p_e") {
            out.channel.p_e = v;
        } else if (key == "eps_abs") {
            out.layout.eps_abs = v;
        } else if (key == "g_r") {
            out.channel.g_r = iv;
        } else if (key == "w0") {
            out.contention.w0 = iv;
        } else if (key == "sim_slots") {
            out.sim_slots = static_cast<std::int64_t>(std::llround(v));
        } else if (key == "seed") {
            out.seed = static_cast<std::uint64_t>(std::llround(v));
        } else if (key == "flexing") {
            out.protocol.flexing = iv != 0;
        } else if (key == "soft_reservation") {
            out.protocol.soft_reservation = iv != 0;
        } else if (key == "adapt") {
            out.adapt.enabled = iv != 0;
        } else if (key == "window") {
            for (auto& tc : out.traffic_classes)
                if (tc.mechanism != Mechanism::Csma) tc.window = iv;
            out.population = derive_population(out.traffic_classes, out.class_mix);
        } else {
            throw std::invalid_argument("sweep: unknown key '" + key + "'");
        }
    }
    return out;
}

std::string describe(const SweepPoint& p) {
    std::string s;
    for (const auto& [k, v] : p) {
        if (!s.empty()) s += ';';
        s += k + '=' + format_number(v);
    }
    return s.empty() ? "base" : s;
}

}  // namespace dsgarm::report
