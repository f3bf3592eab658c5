#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "dsgarm/core/types.hpp"

namespace dsgarm::analytic {

class NoConvergence : public std::runtime_error {
public:
    NoConvergence(const std::string& what, double residual, std::vector<double> trace = {})
        : std::runtime_error(what), residual_(residual), trace_(std::move(trace)) {}
    double residual() const { return residual_; }
    const std::vector<double>& trace() const { return trace_; }

private:
    double residual_;
    std::vector<double> trace_;
};

/// p_bo[i][v]: probability that a node entering backoff stage i ends up with
/// counter value v (in virtual slots, reserved slots included).
using BackoffLaw = std::vector<std::vector<double>>;

/// Classic law: uniform over [0, W_i - 1] with W_i = 2^i W_0.
BackoffLaw uniform_backoff(const ContentionParams& c);

/// Law when the counter is drawn uniformly over the first W_i unreserved
/// future slots, slot j (1-based) being reserved with probability reserved[j-1]
/// independently. Values are truncated at the revised window W_i + m_rel - 1.
BackoffLaw reserved_backoff(const ContentionParams& c, std::span<const double> reserved, int m_rel);

struct BackoffInput {
    double m_cs = 0.0;
    double m_rel = 0.0;
    double p_no_rsv = 0.0;
    double p_rel_tot = 0.0;
    BackoffLaw p_bo;
    ContentionParams contention;
    double p_e = 0.0;
};

struct BackoffSolution {
    /// Attempt probability per virtual slot.
    double tau = 0.0;
    /// Attempt probability conditioned on an unreserved slot.
    double tau_unreserved = 0.0;
    double p = 0.0;
    double p_c = 0.0;
    double p_tr = 0.0;
    double p_s = 0.0;
    double m_con = 0.0;
    /// Mean idle unreserved slots before a CSMA transmission starts.
    double u_bo = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// Attempt probability of the stage chain for a given failure probability.
double chain_tau(const BackoffLaw& p_bo, int g, double p);

BackoffSolution backoff_model(const BackoffInput& in);

}  // namespace dsgarm::analytic
