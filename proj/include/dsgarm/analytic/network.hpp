#pragma once

#include <vector>

#include "dsgarm/analytic/backoff.hpp"
#include "dsgarm/analytic/reservation.hpp"
#include "dsgarm/core/types.hpp"

namespace dsgarm::analytic {

/// Absolute-reservation group: occupancy over ABS periods plus classic
/// contention in the unreserved ones.
struct AbsGroupSolution {
    std::vector<int> windows;
    OccupancyResult occupancy;
    std::vector<ReservationSteadyState> nodes;
    double p_abs_tot = 0.0;
    BackoffSolution csma;
    double p_cs_suc = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// RAN group: relative reservations over virtual slots plus the CSMA chain.
struct RanGroupSolution {
    std::vector<int> windows;
    int m_cs = 0;
    OccupancyResult occupancy;
    std::vector<ReservationSteadyState> nodes;
    double p_rel_tot = 0.0;
    double p_no_mean = 0.0;
    BackoffSolution backoff;
    double p_cs_suc = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

struct SolveOptions {
    /// Added to every probability of the initial guess (then clamped).
    double perturb = 0.0;
    double damping = 0.5;
    double tolerance = 1e-9;
    int max_iterations = 1000;
};

AbsGroupSolution solve_abs_group(const std::vector<int>& windows, const ChannelParams& ch,
                                 const ContentionParams& ct, const SolveOptions& opt = {});
RanGroupSolution solve_ran_group(const std::vector<int>& rel_windows, int m_cs, const ChannelParams& ch,
                                 const ContentionParams& ct, const SolveOptions& opt = {});

struct MacRates {
    // RAN side; probabilities per RAN virtual slot unless noted.
    double p_rel_rsv = 0.0;   // share of RAN transmissions started by a reservation
    double p_rel_cs = 1.0;    // share started by CSMA
    double p_ran_bs = 0.0;    // virtual slot busy
    double p_cs_suc_rel = 0.0;
    double t_ran_cs = 0.0;
    double t_ran_rel = 0.0;
    double t_ran_tot = 0.0;   // mean slots per RAN transmission including idle backoff
    double u_bo_ran = 0.0;
    /// Per RAN transmission: success probability of each REL node and of a CSMA node.
    std::vector<double> p_ran_rel_suc;
    double p_ran_cs_suc = 0.0;
    /// Per REL node: distribution of foreign busy virtual slots between two of its reservations.
    std::vector<std::vector<double>> p_bet;

    // ABS side; probabilities per ABS period.
    double p_abs_tot = 0.0;
    double p_cs_suc_abs = 0.0;
    double t_abs_rsv = 0.0;
    double t_abs_cs = 0.0;
    double t_abs_tot = 0.0;
    std::vector<double> p_abs_suc;

    // Whole cycle.
    double n_abs = 0.0;
    double n_ran = 0.0;
    double t_cycle = 0.0;
    double p_ran = 0.0;
    double t_all_tot = 0.0;
};

void ran_metrics(MacRates& rates, const RanGroupSolution& ran, const ChannelParams& ch, const ModelOptions& model);
void abs_metrics(MacRates& rates, const AbsGroupSolution& abs, const ChannelParams& ch, int nominal_period);
/// Periods per cycle, RAN ratio and mean unit duration from the region rates.
void cycle_metrics(MacRates& rates, int abs_periods, double cycle_slots);

struct NodeResult {
    int node = 0;
    int class_index = 0;
    Mechanism mechanism = Mechanism::Csma;
    int window = 0;
    double p_ir = 0.0;
    double p_no_rsv = 0.0;
    /// Success probability per transmission unit of the whole cycle.
    double p_st = 0.0;
    double throughput_bps = 0.0;
    double delay_ms = 0.0;
    double p_blocking = 0.0;
    double rsv_slot_ratio = 0.0;
    double rsv_trans_ratio = 0.0;
};

struct ClassResult {
    int class_id = 0;
    Mechanism mechanism = Mechanism::Csma;
    int nodes = 0;
    double throughput_bps = 0.0;   // sum over the class
    double delay_ms = 0.0;         // node mean
    double rsv_slot_ratio = 0.0;   // share of region time in reserved transmissions of the class
    double rsv_trans_ratio = 0.0;  // share of region transmissions reserved by the class
    double p_blocking = 0.0;
    std::vector<double> delay_pdf;
};

struct AnalyticSolution {
    std::vector<NodeResult> nodes;
    std::vector<ClassResult> classes;
    MacRates rates;
    AbsGroupSolution abs;
    RanGroupSolution ran;
    double pdf_bin_ms = 1.0;
    int iterations = 0;
    double residual = 0.0;
};

AnalyticSolution throughput_delay(const Scenario& sc, const MacRates& rates, const AbsGroupSolution& abs,
                                  const RanGroupSolution& ran);

AnalyticSolution solve_network(const Scenario& sc, const SolveOptions& opt = {});

/// d_i for an ABS class: explicit value or floor(lambda * L_min / mean ABS spacing), at least 1.
int blocking_quantity(const TrafficClass& tc, const Scenario& sc);

/// Upper edge of the delay PDF range in ms.
double pdf_range_ms(const Scenario& sc, const std::vector<NodeResult>& nodes);

}  // namespace dsgarm::analytic
