#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dsgarm/core/types.hpp"

namespace dsgarm::sim {

struct NodeCounters {
    int node = 0;
    int class_index = 0;
    Mechanism mechanism = Mechanism::Csma;
    int window = 0;
    std::int64_t successes = 0;
    std::int64_t collisions = 0;
    std::int64_t decode_failures = 0;
    std::int64_t rsv_tx = 0;
    std::int64_t csma_tx = 0;
    std::int64_t rsv_slots = 0;
    std::int64_t selections = 0;
    std::int64_t blocked = 0;
    std::int64_t swaps = 0;
    std::int64_t deadline_misses = 0;
    std::vector<double> delays_ms;

    std::int64_t tx_events() const { return successes + collisions + decode_failures; }
};

/// Slot accounting of one region (ABS or RAN) over the measured interval.
struct RegionCounters {
    std::int64_t slots = 0;
    std::int64_t idle = 0;
    std::int64_t success = 0;
    std::int64_t collided = 0;
    std::int64_t failed_decode = 0;
    std::int64_t tx_events = 0;      // busy periods / virtual slots
    std::int64_t rsv_events = 0;     // of which started by a reservation
    std::int64_t periods = 0;        // ABS periods played
    std::int64_t reserved_collisions = 0;
    std::int64_t denied = 0;         // transmissions refused at a reserved boundary
};

struct WindowChange {
    double time_s = 0.0;
    int node = 0;
    int window = 0;
};

struct SimResult {
    std::vector<NodeCounters> nodes;
    RegionCounters abs;
    RegionCounters ran;
    std::int64_t total_slots = 0;
    std::int64_t rsv_receptions = 0;
    std::int64_t rsv_misses = 0;
    std::int64_t empty_queue_events = 0;
    std::vector<WindowChange> trace;
    /// Time of the last window change; 0 when windows never changed.
    double convergence_s = 0.0;
};

struct SimOptions {
    /// Cycles simulated before counters start.
    int warmup_cycles = 5;
    /// One tab-separated line per node transmission when set.
    std::ostream* event_log = nullptr;
};

/// Deterministic for a fixed scenario (including its seed).
SimResult run_simulation(const Scenario& sc, const SimOptions& opt = {});

}  // namespace dsgarm::sim
