#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dsgarm/core/types.hpp"

namespace dsgarm::analytic {
struct AnalyticSolution;
}
namespace dsgarm::sim {
struct SimResult;
}

namespace dsgarm::metrics {

struct UtilityParams {
    double l_min = 0.0;
    double l_max = 1.0;
    double k_util = 1.0;

    /// k chosen so that U(l_min) = 1 - 1e-3.
    static UtilityParams from_bounds(double l_min, double l_max);
};

/// Z-shaped delay utility.
double delay_utility(double t_ms, const UtilityParams& p);

/// Utility of a class at a given mean delay; ordinary classes count as 1.
double class_utility(const TrafficClass& tc, double delay_ms);

/// Weighted average delay utility over the real-time classes.
double wadu(std::span<const double> utilities, std::span<const double> weights, const std::vector<bool>& real_time);

/// Utility-weighted throughput: sum of alpha * U * H.
double uwt(std::span<const double> utilities, std::span<const double> weights, std::span<const double> throughputs);

class EmptySamples : public std::invalid_argument {
public:
    EmptySamples() : std::invalid_argument("delay_pdf: no samples") {}
};

/// Normalized histogram with bins [i*bin_ms, (i+1)*bin_ms). With `bins` > 0
/// the histogram is truncated and overflow goes to the last bin.
std::vector<double> delay_pdf(std::span<const double> samples, double bin_ms, std::size_t bins = 0);

double total_variation(std::span<const double> a, std::span<const double> b);
double sample_variance(std::span<const double> x);

/// Round to the precision used in CSV reports (9 significant digits).
double quantize(double x);

struct ClassMetrics {
    int class_id = 0;
    Mechanism mechanism = Mechanism::Csma;
    int nodes = 0;
    double throughput_bps = 0.0;
    double delay_ms = 0.0;
    double rsv_slot_ratio = 0.0;
    double rsv_trans_ratio = 0.0;
    double p_blocking = 0.0;
    std::int64_t collisions = 0;
    std::vector<double> delay_pdf;
};

struct NodeMetrics {
    int node = 0;
    int class_id = 0;
    double throughput_bps = 0.0;
    double delay_ms = 0.0;
    double rsv_slot_ratio = 0.0;
    double rsv_trans_ratio = 0.0;
    double p_blocking = 0.0;
    std::int64_t collisions = 0;
};

/// Values shared by the analytic and simulated stacks, quantized to report precision.
struct Summary {
    std::vector<ClassMetrics> classes;
    std::vector<NodeMetrics> nodes;
    double pdf_bin_ms = 1.0;
    double convergence_s = 0.0;
    bool simulated = false;
};

Summary summarize(const Scenario& sc, const analytic::AnalyticSolution& sol);
Summary summarize(const Scenario& sc, const sim::SimResult& res, double pdf_range_ms, double bin_ms = 1.0);

/// WADU and UWT of a summary, computed from its class rows.
double summary_wadu(const Scenario& sc, const Summary& s);
double summary_uwt(const Scenario& sc, const Summary& s);

}  // namespace dsgarm::metrics
