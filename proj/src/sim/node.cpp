#include "dsgarm/sim/node.hpp"

#include <algorithm>
#include <stdexcept>

namespace dsgarm::sim {

namespace {

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
    std::uniform_int_distribution<std::size_t> u(0, v.size() - 1);
    return v[u(rng)];
}

}  // namespace

std::optional<std::int64_t> select_abs_period(const PeriodLedger& ledger, std::int64_t current, int n, int d,
                                              bool urgent, Rng& rng) {
    if (n < 1) throw std::invalid_argument("select_abs_period: window must be >= 1");
    bool blocked = d >= 1;
    for (int j = 1; j <= d && blocked; ++j) blocked = ledger.reserved(current + j);
    if (blocked) return std::nullopt;
    const auto idle = ledger.idle_from(current + 1, urgent ? 1 : n);
    return urgent ? idle.front() : pick(idle, rng);
}

std::int64_t select_rel_backoff(const PeriodLedger& ledger, std::int64_t next, int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("select_rel_backoff: window must be >= 1");
    return pick(ledger.idle_from(next, n), rng);
}

std::int64_t draw_csma_target(const PeriodLedger& ledger, std::int64_t next, int w, Rng& rng) {
    std::uniform_int_distribution<int> u(0, std::max(1, w) - 1);
    return ledger.nth_idle(next, u(rng));
}

std::int64_t collision_shift(const PeriodLedger& ledger, std::int64_t next, std::int64_t incoming, int i_ch,
                             Rng& rng) {
    const std::int64_t b = incoming - next;
    std::vector<std::int64_t> cand;
    for (std::int64_t v = std::max<std::int64_t>(0, b - i_ch); v <= b + i_ch; ++v)
        if (v != b && !ledger.reserved(next + v)) cand.push_back(next + v);
    if (cand.empty()) return ledger.nth_idle(next + b + i_ch + 1, 0);
    return pick(cand, rng);
}

bool handle_rsv_mpdu(NodeState& node, const RsvMpdu& mpdu, bool decoded, std::int64_t next, int i_ch) {
    if (!decoded || mpdu.source == node.id) return false;
    // A swap notice addressed to us moves our own reservation.
    if (mpdu.moved_holder == node.id && node.own_reservation == mpdu.reserved_period) {
        node.own_reservation = mpdu.moved_to;
    } else if (mpdu.moved_holder >= 0 && mpdu.moved_to >= 0) {
        node.reservation_ledger.reserve(mpdu.moved_to, mpdu.moved_holder);
    }
    node.reservation_ledger.reserve(mpdu.reserved_period, mpdu.source);
    if (static_cast<std::size_t>(mpdu.source) < node.heard.size()) node.heard[mpdu.source] = 1;
    node.cycle_sync = mpdu.next_cycle_start;
    std::erase_if(node.soft_entries, [&](const SoftEntry& e) {
        return e.holder == mpdu.source || e.t_les == mpdu.reserved_period || e.t_les < next;
    });
    if (mpdu.moved_holder < 0 && mpdu.reserved_period < mpdu.latest_period)
        node.soft_entries.push_back({mpdu.source, mpdu.reserved_period, mpdu.latest_period});

    if (node.own_reservation == mpdu.reserved_period && mpdu.moved_holder != node.id)
        node.own_reservation = collision_shift(node.reservation_ledger, next, mpdu.reserved_period, i_ch, node.rng);
    if (node.cs_target == mpdu.reserved_period)
        node.cs_target = collision_shift(node.reservation_ledger, next, mpdu.reserved_period, i_ch, node.rng);
    return true;
}

std::optional<SwapOutcome> soft_negotiate(const std::vector<SoftEntry>& entries, const PeriodLedger& ledger,
                                          std::int64_t current, std::int64_t requester_t_lat) {
    std::vector<const SoftEntry*> cand;
    for (const auto& e : entries)
        if (e.t_les > current && e.t_les <= requester_t_lat && e.t_lat > e.t_les) cand.push_back(&e);
    std::stable_sort(cand.begin(), cand.end(), [](const SoftEntry* a, const SoftEntry* b) { return a->t_les > b->t_les; });
    for (const SoftEntry* e : cand)
        for (std::int64_t p = e->t_les + 1; p <= e->t_lat; ++p)
            if (!ledger.reserved(p)) return SwapOutcome{e->holder, e->t_les, p};
    return std::nullopt;
}

bool flexible_extension(std::int64_t overrun, int t_fle, bool flexing) {
    if (overrun <= 0) return true;
    return flexing && overrun < t_fle;
}

}  // namespace dsgarm::sim
