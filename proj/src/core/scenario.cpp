#include "dsgarm/core/scenario.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace dsgarm {

std::string_view to_string(Mechanism m) {
    switch (m) {
        case Mechanism::Abs: return "abs";
        case Mechanism::Rel: return "rel";
        case Mechanism::Csma: return "csma";
    }
    return "?";
}

std::optional<Mechanism> mechanism_from_string(std::string_view s) {
    if (s == "abs") return Mechanism::Abs;
    if (s == "rel") return Mechanism::Rel;
    if (s == "csma") return Mechanism::Csma;
    return std::nullopt;
}

std::string_view to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::InvalidWeight: return "InvalidWeight";
        case ErrorCode::InvalidBounds: return "InvalidBounds";
        case ErrorCode::LayoutOverflow: return "LayoutOverflow";
        case ErrorCode::EmptyNetwork: return "EmptyNetwork";
        case ErrorCode::InvalidBlocking: return "InvalidBlocking";
        case ErrorCode::InvalidRange: return "InvalidRange";
        case ErrorCode::MixMismatch: return "MixMismatch";
        case ErrorCode::DuplicateClass: return "DuplicateClass";
    }
    return "?";
}

DurationTable default_durations(double capacity_bps, int payload_bytes, double slot_us) {
    const double payload_us = 8.0 * payload_bytes / capacity_bps * 1e6;
    auto slots = [&](double overhead_us) {
        return std::max(1, static_cast<int>(std::lround((payload_us + overhead_us) / slot_us)));
    };
    DurationTable d;
    d.t_suc_cs = d.t_suc_rsv = slots(60.0);
    d.t_fai_cs = d.t_fai_rsv = slots(40.0);
    return d;
}

Population derive_population(const std::vector<TrafficClass>& classes, const std::vector<int>& mix) {
    Population p;
    for (std::size_t c = 0; c < classes.size() && c < mix.size(); ++c) {
        for (int i = 0; i < mix[c]; ++i) {
            switch (classes[c].mechanism) {
                case Mechanism::Abs: ++p.m_abs; break;
                case Mechanism::Rel: ++p.m_rel; break;
                case Mechanism::Csma: ++p.m_cs; break;
            }
            p.per_node_window.push_back(classes[c].window);
        }
    }
    return p;
}

std::vector<NodeSpec> node_specs(const Scenario& sc) {
    std::vector<NodeSpec> out;
    int node = 0;
    for (std::size_t c = 0; c < sc.traffic_classes.size() && c < sc.class_mix.size(); ++c) {
        for (int i = 0; i < sc.class_mix[c]; ++i, ++node) {
            NodeSpec n;
            n.node = node;
            n.class_index = static_cast<int>(c);
            n.mechanism = sc.traffic_classes[c].mechanism;
            n.window = node < static_cast<int>(sc.population.per_node_window.size())
                           ? sc.population.per_node_window[node]
                           : sc.traffic_classes[c].window;
            out.push_back(n);
        }
    }
    return out;
}

namespace {

class Collector {
public:
    void add(ErrorCode code, std::string field, std::string message) {
        errs_.push_back({code, std::move(field), std::move(message)});
    }
    std::vector<ScenarioError> take() {
        std::stable_sort(errs_.begin(), errs_.end(), [](const auto& a, const auto& b) {
            if (a.field != b.field) return a.field < b.field;
            return static_cast<int>(a.code) < static_cast<int>(b.code);
        });
        return std::move(errs_);
    }

private:
    std::vector<ScenarioError> errs_;
};

std::string idx(const char* base, std::size_t i, const char* field) {
    std::ostringstream os;
    os << base << '[' << i << "]." << field;
    return os.str();
}

}  // namespace

ValidationResult validate_scenario(const Scenario& raw) {
    Collector c;
    std::set<int> ids;
    for (std::size_t i = 0; i < raw.traffic_classes.size(); ++i) {
        const auto& tc = raw.traffic_classes[i];
        if (!(tc.alpha > 0.0))
            c.add(ErrorCode::InvalidWeight, idx("traffic_classes", i, "alpha"),
                  "class " + std::to_string(tc.id) + ": alpha must be > 0");
        if (!(tc.l_min < tc.l_max) || tc.l_min < 0.0)
            c.add(ErrorCode::InvalidBounds, idx("traffic_classes", i, "l_min"),
                  "class " + std::to_string(tc.id) + ": need 0 <= l_min < l_max");
        if (tc.blocking_quantity && *tc.blocking_quantity < 1)
            c.add(ErrorCode::InvalidBlocking, idx("traffic_classes", i, "blocking_quantity"),
                  "class " + std::to_string(tc.id) + ": blocking_quantity must be >= 1");
        if (tc.window < 1)
            c.add(ErrorCode::InvalidRange, idx("traffic_classes", i, "window"), "window must be >= 1");
        if (!ids.insert(tc.id).second)
            c.add(ErrorCode::DuplicateClass, idx("traffic_classes", i, "id"),
                  "duplicate class id " + std::to_string(tc.id));
    }

    const auto& L = raw.layout;
    if (L.cycle_periods < 1) c.add(ErrorCode::InvalidRange, "layout.cycle_periods", "must be >= 1");
    if (L.eps_abs < 0.0 || L.eps_abs > 1.0) c.add(ErrorCode::InvalidRange, "layout.eps_abs", "must lie in [0,1]");
    if (L.eps_abs_max < 0.0 || L.eps_abs_max > 1.0)
        c.add(ErrorCode::InvalidRange, "layout.eps_abs_max", "must lie in [0,1]");
    if (L.eps_rel < 0.0 || L.eps_rel > 1.0) c.add(ErrorCode::InvalidRange, "layout.eps_rel", "must lie in [0,1]");
    if (L.eps_abs > L.eps_abs_max)
        c.add(ErrorCode::LayoutOverflow, "layout.eps_abs", "eps_abs exceeds eps_abs_max");

    const auto& ch = raw.channel;
    if (!(ch.capacity_bps > 0.0)) c.add(ErrorCode::InvalidRange, "channel.capacity_bps", "must be > 0");
    if (ch.payload_bytes < 1) c.add(ErrorCode::InvalidRange, "channel.payload_bytes", "must be >= 1");
    if (!(ch.slot_us > 0.0)) c.add(ErrorCode::InvalidRange, "channel.slot_us", "must be > 0");
    if (!(ch.p_e >= 0.0 && ch.p_e < 1.0)) c.add(ErrorCode::InvalidRange, "channel.p_e", "must lie in [0,1)");
    if (ch.g_r < 1) c.add(ErrorCode::InvalidRange, "channel.g_r", "must be >= 1");
    const auto& d = ch.durations;
    if (d.t_suc_rsv < 1) c.add(ErrorCode::InvalidRange, "channel.durations.t_suc_rsv", "must be > 0");
    if (d.t_fai_rsv < 1) c.add(ErrorCode::InvalidRange, "channel.durations.t_fai_rsv", "must be > 0");
    if (d.t_suc_cs < 1) c.add(ErrorCode::InvalidRange, "channel.durations.t_suc_cs", "must be > 0");
    if (d.t_fai_cs < 1) c.add(ErrorCode::InvalidRange, "channel.durations.t_fai_cs", "must be > 0");

    const auto& ct = raw.contention;
    if (ct.w0 < 2) c.add(ErrorCode::InvalidRange, "contention.w0", "must be >= 2");
    if (ct.g < 0) c.add(ErrorCode::InvalidRange, "contention.g", "must be >= 0");
    if (ct.i_ch < 1) c.add(ErrorCode::InvalidRange, "contention.i_ch", "must be >= 1");

    const auto& a = raw.adapt;
    if (!(a.th_bk > 0.0 && a.th_bk <= 1.0)) c.add(ErrorCode::InvalidRange, "adapt.th_bk", "must lie in (0,1]");
    if (!(a.lambda > 0.0 && a.lambda <= 1.0)) c.add(ErrorCode::InvalidRange, "adapt.lambda", "must lie in (0,1]");
    if (!(a.p_rsv_sui > 0.0 && a.p_rsv_sui < 1.0))
        c.add(ErrorCode::InvalidRange, "adapt.p_rsv_sui", "must lie in (0,1)");
    if (a.n_min < 1 || a.n_max < a.n_min) c.add(ErrorCode::InvalidRange, "adapt.n_min", "need 1 <= n_min <= n_max");
    if (a.search_step < 1) c.add(ErrorCode::InvalidRange, "adapt.search_step", "must be >= 1");
    if (raw.protocol.t_fle && *raw.protocol.t_fle < 0)
        c.add(ErrorCode::InvalidRange, "protocol.t_fle", "must be >= 0");
    if (raw.sim_slots < 1) c.add(ErrorCode::InvalidRange, "sim_slots", "must be >= 1");

    // population totals
    if (raw.class_mix.size() != raw.traffic_classes.size()) {
        c.add(ErrorCode::MixMismatch, "class_mix", "one node count per traffic class required");
    } else {
        bool neg = std::any_of(raw.class_mix.begin(), raw.class_mix.end(), [](int v) { return v < 0; });
        if (neg) c.add(ErrorCode::InvalidRange, "class_mix", "node counts must be >= 0");
        const Population expect = derive_population(raw.traffic_classes, raw.class_mix);
        const Population& p = raw.population;
        if (p.m_abs != expect.m_abs || p.m_rel != expect.m_rel || p.m_cs != expect.m_cs)
            c.add(ErrorCode::MixMismatch, "population", "mechanism counts disagree with class_mix");
        if (!p.per_node_window.empty() && static_cast<int>(p.per_node_window.size()) != p.total())
            c.add(ErrorCode::MixMismatch, "population.per_node_window", "one window per node required");
        if (std::any_of(p.per_node_window.begin(), p.per_node_window.end(), [](int n) { return n < 1; }))
            c.add(ErrorCode::InvalidRange, "population.per_node_window", "every window must be >= 1");
        if (expect.total() < 1) c.add(ErrorCode::EmptyNetwork, "population", "network has no nodes");
    }

    auto errs = c.take();
    if (errs.empty()) return ValidationResult(raw);
    return ValidationResult(std::move(errs));
}

namespace {
std::string join_errors(const std::vector<ScenarioError>& errs) {
    std::ostringstream os;
    os << "invalid scenario:";
    for (const auto& e : errs) os << "\n  " << to_string(e.code) << " " << e.field << ": " << e.message;
    return os.str();
}
}  // namespace

InvalidScenario::InvalidScenario(std::vector<ScenarioError> errs)
    : std::runtime_error(join_errors(errs)), errors_(std::move(errs)) {}

Scenario checked(const Scenario& raw) {
    auto r = validate_scenario(raw);
    if (!r.ok()) throw InvalidScenario(r.errors());
    return r.scenario();
}

std::vector<TrafficClass> reference_classes() {
    auto make = [](int id, double alpha, double lmin, double lmax, Mechanism m, int window, bool rt) {
        TrafficClass t;
        t.id = id;
        t.alpha = alpha;
        t.l_min = lmin;
        t.l_max = lmax;
        t.mechanism = m;
        t.window = window;
        t.real_time = rt;
        return t;
    };
    // Ordinary classes carry no delay bound of their own; the wide bounds keep
    // the invariants satisfied and are not used for utility.
    return {
        make(0, 1.48, 34.0, 68.0, Mechanism::Abs, 40, true),
        make(1, 1.16, 82.0, 134.0, Mechanism::Abs, 40, true),
        make(2, 1.00, 1000.0, 2000.0, Mechanism::Rel, 80, false),
        make(3, 0.84, 1000.0, 2000.0, Mechanism::Rel, 80, false),
        make(4, 0.72, 1000.0, 2000.0, Mechanism::Rel, 80, false),
        make(5, 0.58, 1000.0, 2000.0, Mechanism::Csma, 80, false),
    };
}

std::vector<int> apportion(int nodes, const std::vector<double>& shares) {
    const double total = std::accumulate(shares.begin(), shares.end(), 0.0);
    std::vector<int> out(shares.size(), 0);
    if (total <= 0.0 || shares.empty()) return out;
    std::vector<std::pair<double, std::size_t>> rem;
    int assigned = 0;
    for (std::size_t i = 0; i < shares.size(); ++i) {
        const double exact = nodes * shares[i] / total;
        out[i] = static_cast<int>(std::floor(exact));
        assigned += out[i];
        rem.emplace_back(exact - out[i], i);
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t k = 0; assigned < nodes && k < rem.size(); ++k, ++assigned) ++out[rem[k].second];
    return out;
}

Scenario reference_scenario(int nodes, const std::vector<double>& shares) {
    Scenario sc;
    sc.name = "reference";
    sc.traffic_classes = reference_classes();
    sc.channel.durations = default_durations(sc.channel.capacity_bps, sc.channel.payload_bytes, sc.channel.slot_us);
    sc.class_mix = apportion(nodes, shares);
    sc.population = derive_population(sc.traffic_classes, sc.class_mix);
    return sc;
}

Scenario with_node_count(const Scenario& sc, int nodes) {
    Scenario out = sc;
    std::vector<double> shares(sc.class_mix.begin(), sc.class_mix.end());
    out.class_mix = apportion(nodes, shares);
    out.population = derive_population(out.traffic_classes, out.class_mix);
    return out;
}

}  // namespace dsgarm
