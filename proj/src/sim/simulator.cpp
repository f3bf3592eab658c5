#include "dsgarm/sim/simulator.hpp"

#include <algorithm>
#include <map>
#include <ostream>

#include "dsgarm/adapt/adapt.hpp"
#include "dsgarm/analytic/network.hpp"
#include "dsgarm/sim/node.hpp"

namespace dsgarm::sim {

namespace {

enum class Outcome { Success, Collision, DecodeFail };

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::Success: return "success";
        case Outcome::Collision: return "collision";
        case Outcome::DecodeFail: return "decode_fail";
    }
    return "?";
}

class Engine {
public:
    Engine(const Scenario& sc, const SimOptions& opt) : sc_(sc), opt_(opt) {
        specs_ = node_specs(sc);
        const int m = static_cast<int>(specs_.size());
        std::seed_seq chan_seed{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32), 0xC4A17u};
        chan_.seed(chan_seed);
        n_abs_ = sc.layout.abs_periods();
        cycle_ = sc.cycle_slots();
        nominal_ = sc.period_slots();
        h_r_ = sc.channel.h_r();
        p_e_ = sc.channel.p_e;
        reduced_w0_ = std::max(4, sc.contention.w0 / 4);
        for (int k = 0; k < m; ++k) {
            const auto& s = specs_[k];
            NodeState n;
            n.id = k;
            n.mechanism = s.mechanism;
            n.traffic_class = s.class_index;
            n.window = s.window;
            n.weight = sc.traffic_classes[s.class_index].alpha;
            n.heard.assign(m, 0);
            n.heard[k] = 1;
            std::seed_seq seed{static_cast<std::uint32_t>(sc.seed), static_cast<std::uint32_t>(sc.seed >> 32),
                               static_cast<std::uint32_t>(k), 0x5EEDu};
            n.rng.seed(seed);
            nodes_.push_back(std::move(n));
            if (s.mechanism == Mechanism::Abs) abs_ids_.push_back(k);
            else ran_ids_.push_back(k);
            d_.push_back(s.mechanism == Mechanism::Abs ? analytic::blocking_quantity(sc.traffic_classes[s.class_index], sc) : 0);
        }
        for (int k : abs_ids_) restart_abs_contention(nodes_[k], 0);
        for (int k : ran_ids_) nodes_[k].cs_target = draw_csma_target(nodes_[k].reservation_ledger, 0, window_of(nodes_[k], 0), nodes_[k].rng);
        res_.nodes.resize(m);
        warm_.nodes.resize(m);
        for (int k = 0; k < m; ++k) {
            for (SimResult* r : {&res_, &warm_}) {
                r->nodes[k].node = k;
                r->nodes[k].class_index = specs_[k].class_index;
                r->nodes[k].mechanism = specs_[k].mechanism;
                r->nodes[k].window = specs_[k].window;
            }
        }
        cur_ = &warm_;
    }

    SimResult run() {
        std::int64_t t0 = 0;
        for (std::int64_t c = 0;; ++c) {
            if (c == opt_.warmup_cycles) {
                cur_ = &res_;
                measuring_ = true;
                t0 = t_;
            }
            if (measuring_ && t_ - t0 >= sc_.sim_slots) break;
            const std::int64_t cycle_start = c * cycle_;
            t_ = std::max(t_, cycle_start);
            if (sc_.adapt.enabled) adapt_windows();
            play_abs_region();
            play_ran_region(cycle_start + cycle_);
        }
        res_.total_slots = t_ - t0;
        for (auto& n : res_.nodes) n.window = nodes_[n.node].window;
        res_.trace = trace_;
        res_.convergence_s = trace_.empty() ? 0.0 : trace_.back().time_s;
        return std::move(res_);
    }

private:
    // ---- helpers --------------------------------------------------------
    bool bernoulli(double p) {
        if (p >= 1.0) return true;
        if (p <= 0.0) return false;
        return std::uniform_real_distribution<double>(0.0, 1.0)(chan_) < p;
    }
    bool rsv_decodes() { return bernoulli(h_r_); }
    bool data_decodes() { return bernoulli(1.0 - p_e_); }

    int window_of(const NodeState& n, int stage) const {
        const int base = n.reduced_window ? reduced_w0_ : sc_.contention.w0;
        return base << std::min(stage, sc_.contention.g);
    }
    double slot_ms() const { return sc_.channel.slot_ms(); }
    const TrafficClass& cls(const NodeState& n) const { return sc_.traffic_classes[n.traffic_class]; }

    void restart_abs_contention(NodeState& n, int stage) {
        n.backoff_stage = std::min(stage, sc_.contention.g);
        std::uniform_int_distribution<int> u(0, window_of(n, n.backoff_stage) - 1);
        n.counter = u(n.rng);
    }

    void log(std::int64_t slot, const NodeState& n, Outcome o, const char* region, bool reserved) {
        if (!opt_.event_log || !measuring_) return;
        *opt_.event_log << slot << '\t' << n.id << '\t' << to_string(n.mechanism) << '\t' << outcome_name(o) << '\t'
                        << region << '\t' << (reserved ? 1 : 0) << '\n';
    }

    void record_success(NodeState& n, std::int64_t end) {
        auto& c = cur_->nodes[n.id];
        ++c.successes;
        const double delay = (end - n.hol_since) * slot_ms();
        if (measuring_) {
            c.delays_ms.push_back(delay);
            if (cls(n).real_time && delay > cls(n).l_max) ++c.deadline_misses;
        }
        n.hol_since = end;
        for (auto& o : nodes_) o.heard[n.id] = 1;
    }

    // Nominal start slot of ABS period p (used for delay-bound bookkeeping).
    std::int64_t period_time(std::int64_t p) const {
        return (p / n_abs_) * cycle_ + (p % n_abs_) * nominal_;
    }
    std::int64_t latest_period(const NodeState& n, std::int64_t current, std::int64_t now) const {
        const double bound_ms = cls(n).l_max - (now - n.hol_since) * slot_ms();
        const std::int64_t deadline = now + static_cast<std::int64_t>(bound_ms / slot_ms());
        std::int64_t p = current;
        const std::int64_t cap = current + 4 * std::max(n.window, 1);
        while (p < cap && period_time(p + 1) + nominal_ <= deadline) ++p;
        return p;
    }

    void broadcast(const RsvMpdu& m, const std::vector<int>& group, std::int64_t next, int forced = -1) {
        for (int k : group) {
            if (k == m.source) continue;
            const bool dec = k == forced || rsv_decodes();
            ++cur_->rsv_receptions;
            if (!dec) ++cur_->rsv_misses;
            handle_rsv_mpdu(nodes_[k], m, dec, next, sc_.contention.i_ch);
        }
    }

    // ---- absolute reservations -----------------------------------------
    void abs_reserve(NodeState& n, std::int64_t p, std::int64_t now) {
        auto& c = cur_->nodes[n.id];
        ++c.selections;
        const bool urgent =
            sc_.protocol.urgent_offset && (now - n.hol_since) * slot_ms() > sc_.adapt.lambda * cls(n).l_min;
        auto q = select_abs_period(n.reservation_ledger, p, n.window, d_[n.id], urgent, n.rng);
        RsvMpdu m;
        m.source = n.id;
        m.weight = n.weight;
        m.next_cycle_start = (p / n_abs_ + 1) * cycle_;
        m.duration = sc_.channel.durations.t_suc_rsv;
        int forced = -1;
        if (!q) {
            ++c.blocked;
            if (sc_.protocol.soft_reservation) {
                auto sw = soft_negotiate(n.soft_entries, n.reservation_ledger, p, p + d_[n.id]);
                if (sw && rsv_decodes()) {
                    q = sw->t_les;
                    m.moved_holder = sw->holder;
                    m.moved_to = sw->t_idl;
                    forced = sw->holder;
                    ++c.swaps;
                }
            }
            if (!q) {
                n.own_reservation.reset();
                n.reduced_window = true;
                restart_abs_contention(n, 0);
                return;
            }
        }
        m.reserved_period = *q;
        m.latest_period = std::max(*q, latest_period(n, p, now));
        m.remaining_tolerance_ms = std::max(0.0, cls(n).l_max - (now - n.hol_since) * slot_ms());
        n.own_reservation = *q;
        n.reduced_window = false;
        broadcast(m, abs_ids_, p + 1, forced);
        if (!rsv_decodes()) n.own_reservation.reset();
    }

    bool abs_holder(std::int64_t p) const {
        for (int k : abs_ids_)
            if (nodes_[k].own_reservation == p) return true;
        return false;
    }

    void play_abs_region() {
        for (int k = 0; k < n_abs_; ++k) {
            const std::int64_t p = g_abs_++;
            const std::int64_t start = t_;
            const std::int64_t nominal_end = start + nominal_;
            auto& reg = cur_->abs;
            ++reg.periods;

            std::vector<int> holders;
            for (int i : abs_ids_)
                if (nodes_[i].own_reservation == p) holders.push_back(i);

            std::int64_t end = nominal_end;
            if (!holders.empty()) {
                const auto& dt = sc_.channel.durations;
                ++reg.tx_events;
                ++reg.rsv_events;
                if (holders.size() == 1) {
                    NodeState& n = nodes_[holders[0]];
                    const std::int64_t d = dt.t_suc_rsv;
                    end = std::max(nominal_end, start + d);
                    auto& c = cur_->nodes[n.id];
                    ++c.rsv_tx;
                    c.rsv_slots += d;
                    if (data_decodes()) {
                        reg.success += d;
                        record_success(n, start + d);
                        log(start, n, Outcome::Success, "ABS", true);
                    } else {
                        reg.failed_decode += d;
                        ++c.decode_failures;
                        log(start, n, Outcome::DecodeFail, "ABS", true);
                    }
                    n.own_reservation.reset();
                    abs_reserve(n, p, start + d);
                    reg.idle += end - start - d;
                } else {
                    const std::int64_t d = dt.t_fai_rsv;
                    end = std::max(nominal_end, start + d);
                    reg.collided += d;
                    reg.idle += end - start - d;
                    ++reg.reserved_collisions;
                    for (int i : holders) {
                        NodeState& n = nodes_[i];
                        auto& c = cur_->nodes[i];
                        ++c.rsv_tx;
                        ++c.collisions;
                        c.rsv_slots += d;
                        log(start, n, Outcome::Collision, "ABS", true);
                        n.own_reservation.reset();
                    }
                }
            } else {
                end = abs_contention(p, start, nominal_end, k + 1 < n_abs_ && abs_holder(p + 1));
            }
            reg.slots += end - start;
            t_ = end;
        }
    }

    // One unreserved ABS period: classic contention among the ABS nodes that
    // see it as free. Returns the period end.
    std::int64_t abs_contention(std::int64_t p, std::int64_t start, std::int64_t nominal_end, bool next_reserved) {
        auto& reg = cur_->abs;
        std::vector<int> elig;
        for (int i : abs_ids_)
            if (!nodes_[i].reservation_ledger.reserved(p)) elig.push_back(i);
        std::int64_t cur = start;
        std::vector<int> tx;
        while (true) {
            if (elig.empty() || (next_reserved && cur >= nominal_end)) {
                const std::int64_t end = std::max(cur, nominal_end);
                reg.idle += end - start;
                return end;
            }
            tx.clear();
            for (int i : elig)
                if (nodes_[i].counter == 0) tx.push_back(i);
            if (tx.empty()) {
                for (int i : elig) --nodes_[i].counter;
                ++cur;
                continue;
            }
            const auto& dt = sc_.channel.durations;
            const std::int64_t d = tx.size() == 1 ? dt.t_suc_cs : dt.t_fai_cs;
            if (next_reserved && !flexible_extension(cur + d - nominal_end, sc_.t_fle(), sc_.protocol.flexing)) {
                ++reg.denied;
                const std::int64_t end = std::max(cur, nominal_end);
                reg.idle += end - start;
                return end;
            }
            ++reg.tx_events;
            if (tx.size() == 1) {
                NodeState& n = nodes_[tx[0]];
                auto& c = cur_->nodes[n.id];
                ++c.csma_tx;
                const bool ok = data_decodes();
                if (ok) {
                    reg.success += d;
                    record_success(n, cur + d);
                    log(cur, n, Outcome::Success, "ABS", false);
                } else {
                    reg.failed_decode += d;
                    ++c.decode_failures;
                    log(cur, n, Outcome::DecodeFail, "ABS", false);
                }
                restart_abs_contention(n, ok ? 0 : n.backoff_stage + 1);
                if (!n.own_reservation) abs_reserve(n, p, cur + d);
            } else {
                reg.collided += d;
                for (int i : tx) {
                    NodeState& n = nodes_[i];
                    ++cur_->nodes[i].csma_tx;
                    ++cur_->nodes[i].collisions;
                    log(cur, n, Outcome::Collision, "ABS", false);
                    restart_abs_contention(n, n.backoff_stage + 1);
                }
            }
            const std::int64_t end = std::max(nominal_end, cur + d);
            reg.idle += end - start - d;
            return end;
        }
    }

    // ---- RAN region -----------------------------------------------------
    void ran_reserve(NodeState& n, std::int64_t next) {
        ++cur_->nodes[n.id].selections;
        RsvMpdu m;
        m.source = n.id;
        m.weight = n.weight;
        m.reserved_period = select_rel_backoff(n.reservation_ledger, next, n.window, n.rng);
        m.latest_period = m.reserved_period;
        m.duration = sc_.channel.durations.t_suc_rsv;
        m.next_cycle_start = cycle_ * (t_ / cycle_ + 1);
        n.own_reservation = m.reserved_period;
        n.cs_target = -1;
        n.backoff_stage = 0;
        broadcast(m, ran_ids_, next);
        if (!rsv_decodes()) {
            n.own_reservation.reset();
            n.cs_target = draw_csma_target(n.reservation_ledger, next, window_of(n, 0), n.rng);
        }
    }

    void csma_redraw(NodeState& n, std::int64_t next, int stage) {
        n.backoff_stage = std::min(stage, sc_.contention.g);
        n.cs_target = draw_csma_target(n.reservation_ledger, next, window_of(n, n.backoff_stage), n.rng);
    }

    void play_ran_region(std::int64_t cycle_end) {
        auto& reg = cur_->ran;
        const std::int64_t start = t_;
        if (t_ >= cycle_end) return;
        if (ran_ids_.empty()) {
            reg.idle += cycle_end - t_;
            reg.slots += cycle_end - t_;
            t_ = cycle_end;
            return;
        }
        const bool boundary_reserved = n_abs_ > 0 && abs_holder(g_abs_);
        const auto& dt = sc_.channel.durations;
        std::int64_t cur = t_;
        std::vector<int> tx;
        std::vector<char> by_rsv;
        while (cur < cycle_end) {
            const std::int64_t v = v_ran_;
            tx.clear();
            by_rsv.clear();
            for (int i : ran_ids_) {
                const NodeState& n = nodes_[i];
                if (n.own_reservation == v) {
                    tx.push_back(i);
                    by_rsv.push_back(1);
                } else if (!n.own_reservation && n.cs_target == v) {
                    tx.push_back(i);
                    by_rsv.push_back(0);
                }
            }
            if (tx.empty()) {
                ++reg.idle;
                ++cur;
                ++v_ran_;
                continue;
            }
            std::int64_t d = 0;
            if (tx.size() == 1) d = by_rsv[0] ? dt.t_suc_rsv : dt.t_suc_cs;
            else
                for (std::size_t j = 0; j < tx.size(); ++j) d = std::max<std::int64_t>(d, by_rsv[j] ? dt.t_fai_rsv : dt.t_fai_cs);
            const std::int64_t overrun = cur + d - cycle_end;
            if (overrun > 0 && boundary_reserved &&
                !flexible_extension(overrun, sc_.t_fle(), sc_.protocol.flexing)) {
                ++reg.denied;
                reg.idle += cycle_end - cur;
                cur = cycle_end;
                break;
            }
            ++v_ran_;
            ++reg.tx_events;
            const std::int64_t next = v_ran_;
            if (tx.size() == 1) {
                NodeState& n = nodes_[tx[0]];
                auto& c = cur_->nodes[n.id];
                const bool rsv = by_rsv[0];
                if (rsv) {
                    ++reg.rsv_events;
                    ++c.rsv_tx;
                    c.rsv_slots += d;
                } else {
                    ++c.csma_tx;
                }
                const bool ok = data_decodes();
                if (ok) {
                    reg.success += d;
                    record_success(n, cur + d);
                } else {
                    reg.failed_decode += d;
                    ++c.decode_failures;
                }
                log(cur, n, ok ? Outcome::Success : Outcome::DecodeFail, "RAN", rsv);
                if (n.mechanism == Mechanism::Rel) {
                    n.own_reservation.reset();
                    ran_reserve(n, next);
                } else {
                    csma_redraw(n, next, ok ? 0 : n.backoff_stage + 1);
                }
            } else {
                reg.collided += d;
                if (std::find(by_rsv.begin(), by_rsv.end(), 1) != by_rsv.end()) ++reg.rsv_events;
                for (std::size_t j = 0; j < tx.size(); ++j) {
                    NodeState& n = nodes_[tx[j]];
                    auto& c = cur_->nodes[n.id];
                    ++c.collisions;
                    if (by_rsv[j]) {
                        ++c.rsv_tx;
                        c.rsv_slots += d;
                    } else {
                        ++c.csma_tx;
                    }
                    log(cur, n, Outcome::Collision, "RAN", by_rsv[j]);
                    n.own_reservation.reset();
                    csma_redraw(n, next, n.backoff_stage + 1);
                }
            }
            cur += d;
        }
        reg.slots += cur - start;
        t_ = cur;
    }

    // ---- adaptation -----------------------------------------------------
    void adapt_windows() {
        const std::size_t nc = sc_.traffic_classes.size();
        for (auto& n : nodes_) {
            std::vector<int> counts(nc, 0);
            for (std::size_t k = 0; k < nodes_.size(); ++k)
                if (n.heard[k]) ++counts[specs_[k].class_index];
            auto it = memo_.find(counts);
            if (it == memo_.end()) {
                Scenario s = sc_;
                s.class_mix = counts;
                s.population = derive_population(s.traffic_classes, s.class_mix);
                it = memo_.emplace(counts, adapt::adapt_parameters(s)).first;
            }
            const auto& r = it->second;
            int w = n.window;
            if (n.mechanism == Mechanism::Abs && r.n_abs[n.traffic_class] > 0) w = r.n_abs[n.traffic_class];
            if (n.mechanism == Mechanism::Rel && r.n_rel[n.traffic_class] > 0) w = r.n_rel[n.traffic_class];
            if (w != n.window) {
                n.window = w;
                trace_.push_back({t_ * sc_.channel.slot_us * 1e-6, n.id, w});
            }
        }
    }

    const Scenario& sc_;
    SimOptions opt_;
    std::vector<NodeSpec> specs_;
    std::vector<NodeState> nodes_;
    std::vector<int> abs_ids_, ran_ids_;
    std::vector<int> d_;
    Rng chan_;
    int n_abs_ = 0;
    std::int64_t cycle_ = 1;
    int nominal_ = 1;
    double h_r_ = 1.0, p_e_ = 0.0;
    int reduced_w0_ = 4;
    std::int64_t t_ = 0;
    std::int64_t g_abs_ = 0;
    std::int64_t v_ran_ = 0;
    bool measuring_ = false;
    SimResult res_, warm_;
    SimResult* cur_ = nullptr;
    std::vector<WindowChange> trace_;
    std::map<std::vector<int>, adapt::AdaptResult> memo_;
};

}  // namespace

SimResult run_simulation(const Scenario& sc, const SimOptions& opt) {
    Engine e(sc, opt);
    return e.run();
}

}  // namespace dsgarm::sim
