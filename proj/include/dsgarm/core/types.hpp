#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dsgarm {

/// Channel access mechanism used by the nodes carrying a traffic class.
enum class Mechanism { Abs, Rel, Csma };

std::string_view to_string(Mechanism m);
std::optional<Mechanism> mechanism_from_string(std::string_view s);

/// One traffic type. Delay bounds are in milliseconds.
struct TrafficClass {
    int id = 0;
    double alpha = 1.0;
    double l_min = 0.0;
    double l_max = 1.0;
    Mechanism mechanism = Mechanism::Csma;
    /// Reservation blocking quantity d_i in ABS periods. Unset means "derive it"
    /// from the delay bound (see adapt::blocking_quantity).
    std::optional<int> blocking_quantity;
    /// Default reservation window for nodes of this class when the population
    /// does not list per-node windows.
    int window = 40;
    /// Counted in WADU. Defaults to mechanism == Abs when absent from a file.
    bool real_time = false;
};

struct CycleLayout {
    int cycle_periods = 100;
    double eps_abs = 0.42;
    double eps_abs_max = 0.6;
    double eps_rel = 0.514;

    /// Number of ABS periods at the head of every cycle.
    int abs_periods() const { return static_cast<int>(std::lround(eps_abs * cycle_periods)); }
};

/// Average transmission durations, in slots.
struct DurationTable {
    int t_suc_rsv = 70;
    int t_fai_rsv = 68;
    int t_suc_cs = 70;
    int t_fai_cs = 68;
};

struct ChannelParams {
    double capacity_bps = 21e6;
    int payload_bytes = 1500;
    double slot_us = 9.0;
    double p_e = 0.0;
    int g_r = 3;
    DurationTable durations;

    /// Probability that an RSV MPDU decodes: 1 - p_e^g_r.
    double h_r() const { return 1.0 - std::pow(p_e, g_r); }
    double payload_bits() const { return 8.0 * payload_bytes; }
    double slot_ms() const { return slot_us * 1e-3; }
};

/// Durations for a payload at the given rate with fixed per-frame overheads
/// of 60 us (success) and 40 us (failure), rounded to whole slots.
DurationTable default_durations(double capacity_bps, int payload_bytes, double slot_us);

struct ContentionParams {
    int w0 = 16;
    int g = 6;
    int i_ch = 2;
};

struct AdaptConfig {
    bool enabled = false;
    double p_rsv_sui = 0.40;
    double th_bk = 0.05;
    double lambda = 0.85;
    int search_step = 8;
    int n_min = 2;
    int n_max = 400;
};

/// Protocol switches for the simulator.
struct ProtocolOptions {
    bool flexing = true;
    /// Flexible overrun allowance in slots; unset means 20% of t_suc_cs.
    std::optional<int> t_fle;
    bool soft_reservation = true;
    bool urgent_offset = true;
};

/// Analytic model switches.
struct ModelOptions {
    /// Use the REL-via-CSMA success term with the extra P_no factor as printed
    /// (true) or the single-factor form (false).
    bool rel_csma_double_factor = true;
};

struct Population {
    int m_abs = 0;
    int m_rel = 0;
    int m_cs = 0;
    /// One reservation window per node, nodes ordered class by class.
    std::vector<int> per_node_window;

    int total() const { return m_abs + m_rel + m_cs; }
};

struct Scenario {
    std::string name = "scenario";
    std::vector<TrafficClass> traffic_classes;
    /// Node count per traffic class, aligned with traffic_classes.
    std::vector<int> class_mix;
    Population population;
    ChannelParams channel;
    CycleLayout layout;
    ContentionParams contention;
    AdaptConfig adapt;
    ProtocolOptions protocol;
    ModelOptions model;
    std::int64_t sim_slots = 1'000'000;
    std::uint64_t seed = 1;

    int t_fle() const { return protocol.t_fle.value_or(channel.durations.t_suc_cs / 5); }
    /// Nominal ABS period length in slots.
    int period_slots() const { return channel.durations.t_suc_rsv; }
    std::int64_t cycle_slots() const {
        return static_cast<std::int64_t>(layout.cycle_periods) * period_slots();
    }
};

/// Per-node view derived from a scenario: class index and window of every node.
struct NodeSpec {
    int node = 0;
    int class_index = 0;
    Mechanism mechanism = Mechanism::Csma;
    int window = 1;
};

std::vector<NodeSpec> node_specs(const Scenario& sc);

/// Population implied by class_mix and the class windows.
Population derive_population(const std::vector<TrafficClass>& classes, const std::vector<int>& mix);

}  // namespace dsgarm
