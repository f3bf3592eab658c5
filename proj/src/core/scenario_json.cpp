#include <fstream>
#include <set>

#include "dsgarm/core/scenario.hpp"

namespace dsgarm {

using nlohmann::json;

namespace {

// Reads a JSON object while tracking which keys were consumed; anything left
// over is reported as an unknown key.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ScenarioParseError(path_ + ": expected an object");
    }
    template <class T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw ScenarioParseError(path_ + "." + key + ": " + e.what());
        }
    }
    template <class T>
    void get_opt(const char* key, std::optional<T>& out) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception& e) {
            throw ScenarioParseError(path_ + "." + key + ": " + e.what());
        }
    }
    const json* child(const char* key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }
    bool has(const char* key) const { return j_.contains(key); }
    std::string path(const char* key) const { return path_ + "." + key; }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ScenarioParseError(path_ + ": unknown key '" + it.key() + "'");
    }
private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

TrafficClass read_class(const json& j, const std::string& path) {
    Reader r(j, path);
    TrafficClass t;
    r.get("id", t.id);
    r.get("alpha", t.alpha);
    r.get("l_min", t.l_min);
    r.get("l_max", t.l_max);
    std::string mech = "csma";
    r.get("mechanism", mech);
    auto m = mechanism_from_string(mech);
    if (!m) throw ScenarioParseError(path + ".mechanism: expected abs|rel|csma");
    t.mechanism = *m;
    r.get_opt("blocking_quantity", t.blocking_quantity);
    r.get("window", t.window);
    t.real_time = t.mechanism == Mechanism::Abs;
    r.get("real_time", t.real_time);
    r.done();
    return t;
}

}  // namespace

Scenario scenario_from_json(const json& j) {
    Scenario sc;
    Reader r(j, "scenario");
    r.get("name", sc.name);
    if (const json* tcs = r.child("traffic_classes")) {
        if (!tcs->is_array()) throw ScenarioParseError("scenario.traffic_classes: expected an array");
        for (std::size_t i = 0; i < tcs->size(); ++i)
            sc.traffic_classes.push_back(read_class((*tcs)[i], "scenario.traffic_classes[" + std::to_string(i) + "]"));
    }
    r.get("class_mix", sc.class_mix);

    bool durations_given = false;
    if (const json* ch = r.child("channel")) {
        Reader c(*ch, "scenario.channel");
        c.get("capacity_bps", sc.channel.capacity_bps);
        c.get("payload_bytes", sc.channel.payload_bytes);
        c.get("slot_us", sc.channel.slot_us);
        c.get("p_e", sc.channel.p_e);
        c.get("g_r", sc.channel.g_r);
        if (const json* d = c.child("durations")) {
            durations_given = true;
            Reader dr(*d, "scenario.channel.durations");
            dr.get("t_suc_rsv", sc.channel.durations.t_suc_rsv);
            dr.get("t_fai_rsv", sc.channel.durations.t_fai_rsv);
            dr.get("t_suc_cs", sc.channel.durations.t_suc_cs);
            dr.get("t_fai_cs", sc.channel.durations.t_fai_cs);
            dr.done();
        }
        c.done();
    }
    if (!durations_given && sc.channel.capacity_bps > 0 && sc.channel.slot_us > 0)
        sc.channel.durations = default_durations(sc.channel.capacity_bps, sc.channel.payload_bytes, sc.channel.slot_us);

    if (const json* l = r.child("layout")) {
        Reader c(*l, "scenario.layout");
        c.get("cycle_periods", sc.layout.cycle_periods);
        c.get("eps_abs", sc.layout.eps_abs);
        c.get("eps_abs_max", sc.layout.eps_abs_max);
        c.get("eps_rel", sc.layout.eps_rel);
        c.done();
    }
    if (const json* ct = r.child("contention")) {
        Reader c(*ct, "scenario.contention");
        c.get("w0", sc.contention.w0);
        c.get("g", sc.contention.g);
        c.get("i_ch", sc.contention.i_ch);
        c.done();
    }
    if (const json* a = r.child("adapt")) {
        Reader c(*a, "scenario.adapt");
        c.get("enabled", sc.adapt.enabled);
        c.get("p_rsv_sui", sc.adapt.p_rsv_sui);
        c.get("th_bk", sc.adapt.th_bk);
        c.get("lambda", sc.adapt.lambda);
        c.get("search_step", sc.adapt.search_step);
        c.get("n_min", sc.adapt.n_min);
        c.get("n_max", sc.adapt.n_max);
        c.done();
    }
    if (const json* p = r.child("protocol")) {
        Reader c(*p, "scenario.protocol");
        c.get("flexing", sc.protocol.flexing);
        c.get_opt("t_fle", sc.protocol.t_fle);
        c.get("soft_reservation", sc.protocol.soft_reservation);
        c.get("urgent_offset", sc.protocol.urgent_offset);
        c.done();
    }
    if (const json* m = r.child("model")) {
        Reader c(*m, "scenario.model");
        c.get("rel_csma_double_factor", sc.model.rel_csma_double_factor);
        c.done();
    }
    if (const json* pop = r.child("population")) {
        Reader c(*pop, "scenario.population");
        c.get("m_abs", sc.population.m_abs);
        c.get("m_rel", sc.population.m_rel);
        c.get("m_cs", sc.population.m_cs);
        c.get("per_node_window", sc.population.per_node_window);
        c.done();
    } else {
        sc.population = derive_population(sc.traffic_classes, sc.class_mix);
    }
    r.get("sim_slots", sc.sim_slots);
    r.get("seed", sc.seed);
    r.done();
    return sc;
}

json scenario_to_json(const Scenario& sc) {
    json classes = json::array();
    for (const auto& t : sc.traffic_classes) {
        json c = {{"id", t.id},           {"alpha", t.alpha},   {"l_min", t.l_min},
                  {"l_max", t.l_max},     {"mechanism", std::string(to_string(t.mechanism))},
                  {"window", t.window},   {"real_time", t.real_time}};
        if (t.blocking_quantity) c["blocking_quantity"] = *t.blocking_quantity;
        classes.push_back(c);
    }
    const auto& d = sc.channel.durations;
    json protocol = {{"flexing", sc.protocol.flexing},
                     {"soft_reservation", sc.protocol.soft_reservation},
                     {"urgent_offset", sc.protocol.urgent_offset}};
    if (sc.protocol.t_fle) protocol["t_fle"] = *sc.protocol.t_fle;
    return {
        {"name", sc.name},
        {"traffic_classes", classes},
        {"class_mix", sc.class_mix},
        {"population",
         {{"m_abs", sc.population.m_abs},
          {"m_rel", sc.population.m_rel},
          {"m_cs", sc.population.m_cs},
          {"per_node_window", sc.population.per_node_window}}},
        {"channel",
         {{"capacity_bps", sc.channel.capacity_bps},
          {"payload_bytes", sc.channel.payload_bytes},
          {"slot_us", sc.channel.slot_us},
          {"p_e", sc.channel.p_e},
          {"g_r", sc.channel.g_r},
          {"durations",
           {{"t_suc_rsv", d.t_suc_rsv}, {"t_fai_rsv", d.t_fai_rsv}, {"t_suc_cs", d.t_suc_cs}, {"t_fai_cs", d.t_fai_cs}}}}},
        {"layout",
         {{"cycle_periods", sc.layout.cycle_periods},
          {"eps_abs", sc.layout.eps_abs},
          {"eps_abs_max", sc.layout.eps_abs_max},
          {"eps_rel", sc.layout.eps_rel}}},
        {"contention", {{"w0", sc.contention.w0}, {"g", sc.contention.g}, {"i_ch", sc.contention.i_ch}}},
        {"adapt",
         {{"enabled", sc.adapt.enabled},
          {"p_rsv_sui", sc.adapt.p_rsv_sui},
          {"th_bk", sc.adapt.th_bk},
          {"lambda", sc.adapt.lambda},
          {"search_step", sc.adapt.search_step},
          {"n_min", sc.adapt.n_min},
          {"n_max", sc.adapt.n_max}}},
        {"protocol", protocol},
        {"model", {{"rel_csma_double_factor", sc.model.rel_csma_double_factor}}},
        {"sim_slots", sc.sim_slots},
        {"seed", sc.seed},
    };
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioParseError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ScenarioParseError(path + ": " + e.what());
    }
    return scenario_from_json(j);
}

}  // namespace dsgarm
