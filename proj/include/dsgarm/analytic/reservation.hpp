#pragma once

#include <span>
#include <stdexcept>
#include <vector>

namespace dsgarm::analytic {

/// The right window holds no idle period at all.
class AllPeriodsReserved : public std::runtime_error {
public:
    AllPeriodsReserved() : std::runtime_error("all periods in the reservation window are reserved") {}
};

/// A node in non-reservation status can never win a CSMA transmission.
class DivergentChain : public std::runtime_error {
public:
    DivergentChain() : std::runtime_error("non-reservation state is absorbing (p_cs_suc = 0 with h_r < 1)") {}
};

/// Probability of picking each period of a right window, proportional to its
/// idle probability. `idle[d]` is S for the (d+1)-th period after the current one.
std::vector<double> selection_distribution(std::span<const double> idle);

/// Reservation status snapshot: r[k][i] is the probability that node k holds
/// the reservation for absolute period i, s[i] the idle probability.
struct OccupancyState {
    std::vector<std::vector<double>> r;
    std::vector<double> s;
    int current_index = 0;

    /// Idle probability of period i excluding node k's own reservation.
    double idle_for(int k, int i) const { return s[i] + r[k][i]; }
};

/// Selection distribution for node k at the state's current period over the
/// next `c_k` periods.
std::vector<double> selection_distribution(const OccupancyState& state, int k, int c_k);

struct OccupancyResult {
    /// Right window size per node, C_k = N_k + m - 1.
    std::vector<int> c;
    /// Per node selection distribution over offsets 1..C_k (index 0 is offset 1).
    std::vector<std::vector<double>> p_rsv;
    /// Per node probability that offset j is already reserved by other nodes.
    std::vector<std::vector<double>> reserved_by_others;
    /// Total reservation probability of offsets 1..C_max after the sweep.
    std::vector<double> reserved_total;
    /// Element-wise sum over nodes of p_rsv (may exceed 1) and its mean.
    std::vector<double> p_rsv_sum;
    std::vector<double> p_rsv_mean;
};

/// Sweeps the left reservation window accumulating active-reservation
/// probabilities and returns the stationary selection distributions.
/// Nodes with equal (window, p_has) are evaluated as one group.
OccupancyResult occupancy_model(std::span<const int> windows, std::span<const double> p_has_rsv);

struct ReservationSteadyState {
    double p_ir = 0.0;
    double p_no_rsv = 0.0;
    double p_has_rsv = 1.0;
    double mean_offset = 0.0;
    /// b[i] for i = 0..C: probability of i remaining periods (0 = non-reservation).
    std::vector<double> b;
};

/// Stationary law of the remaining-periods chain for one node.
ReservationSteadyState steady_state(std::span<const double> p_rsv, double h_r, double p_cs_suc);

/// Sum of P_IR over a set of steady states.
double total_reservation(std::span<const ReservationSteadyState> nodes);

/// dist[j][d]: probability that exactly d of the first j periods are occupied,
/// each period j occupied independently with probability r[j-1].
std::vector<std::vector<double>> occupied_count_table(std::span<const double> r);

/// Probability that all of the first d periods are reserved.
double blocking_probability(std::span<const double> r_first, int d);

}  // namespace dsgarm::analytic
