#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "dsgarm/core/types.hpp"
#include "dsgarm/sim/ledger.hpp"

namespace dsgarm::sim {

using Rng = std::mt19937_64;

/// Reservation information piggybacked on a data frame.
struct RsvMpdu {
    int source = 0;
    double weight = 1.0;
    /// Absolute ABS period or RAN virtual slot being reserved.
    std::int64_t reserved_period = 0;
    /// Latest period that still meets the sender's delay bound.
    std::int64_t latest_period = 0;
    double remaining_tolerance_ms = 0.0;
    std::int64_t next_cycle_start = 0;
    int duration = 1;
    /// Swap notice: the node `moved_holder` now owns `moved_to`.
    int moved_holder = -1;
    std::int64_t moved_to = -1;
};

struct SoftEntry {
    int holder = 0;
    std::int64_t t_les = 0;
    std::int64_t t_lat = 0;
    bool operator==(const SoftEntry&) const = default;
};

struct NodeState {
    int id = 0;
    Mechanism mechanism = Mechanism::Csma;
    int traffic_class = 0;
    int window = 1;
    double weight = 1.0;

    int backoff_stage = 0;
    /// ABS contention counter, in idle virtual slots of unreserved ABS periods.
    int counter = 0;
    /// RAN contention target: absolute virtual slot of the next CSMA attempt.
    std::int64_t cs_target = -1;

    PeriodLedger reservation_ledger;
    std::optional<std::int64_t> own_reservation;
    bool reduced_window = false;

    /// Slot at which the head-of-line packet started waiting.
    std::int64_t hol_since = 0;
    std::vector<SoftEntry> soft_entries;
    std::vector<char> heard;
    std::int64_t cycle_sync = 0;
    Rng rng;

    bool operator==(const NodeState& o) const {
        return id == o.id && mechanism == o.mechanism && traffic_class == o.traffic_class && window == o.window &&
               backoff_stage == o.backoff_stage && counter == o.counter && cs_target == o.cs_target &&
               reservation_ledger == o.reservation_ledger && own_reservation == o.own_reservation &&
               reduced_window == o.reduced_window && hol_since == o.hol_since && soft_entries == o.soft_entries &&
               heard == o.heard && cycle_sync == o.cycle_sync && rng == o.rng;
    }
};

/// Uniform choice among the first n idle periods after `current`; the first
/// idle one when `urgent`. Empty when the first d periods are all reserved.
std::optional<std::int64_t> select_abs_period(const PeriodLedger& ledger, std::int64_t current, int n, int d,
                                              bool urgent, Rng& rng);

/// Relative reservation: uniform among the first n idle virtual slots at or
/// after `next`. Returns the absolute slot index.
std::int64_t select_rel_backoff(const PeriodLedger& ledger, std::int64_t next, int n, Rng& rng);

/// CSMA draw: counter v uniform in [0, w-1] counted over idle slots only.
std::int64_t draw_csma_target(const PeriodLedger& ledger, std::int64_t next, int w, Rng& rng);

/// Collision shift: a neighbour just reserved `incoming`, which equals our own
/// target. Reselect uniformly among counter values in
/// [I_BO - i_ch, I_BO + i_ch] (clamped at 0) whose slot is still free.
std::int64_t collision_shift(const PeriodLedger& ledger, std::int64_t next, std::int64_t incoming, int i_ch, Rng& rng);

/// Applies a received RSV MPDU. `next` is the first index still in the future
/// (used by the collision shift). Returns true when the state changed.
bool handle_rsv_mpdu(NodeState& node, const RsvMpdu& mpdu, bool decoded, std::int64_t next, int i_ch);

struct SwapOutcome {
    int holder = 0;
    std::int64_t t_les = 0;
    std::int64_t t_idl = 0;
};

/// Soft reservation: among recorded entries with current < t_les <= requester_t_lat
/// (latest first), find one whose holder can move to an idle period in
/// (t_les, t_lat]. Empty means no swap is available.
std::optional<SwapOutcome> soft_negotiate(const std::vector<SoftEntry>& entries, const PeriodLedger& ledger,
                                          std::int64_t current, std::int64_t requester_t_lat);

/// Overrun of a transmission into a reserved ABS period is tolerated iff it
/// is shorter than t_fle (and flexing is on).
bool flexible_extension(std::int64_t overrun, int t_fle, bool flexing);

}  // namespace dsgarm::sim
