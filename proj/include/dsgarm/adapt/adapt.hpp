#pragma once

#include <stdexcept>
#include <vector>

#include "dsgarm/core/types.hpp"

namespace dsgarm::adapt {

/// Windows chosen for one mechanism group. Vectors are indexed by class;
/// classes outside the group keep the window they had in the context.
struct WindowChoice {
    std::vector<int> windows;
    std::vector<double> predicted_delays;
    /// Mean P_bk^{d_i} per class (Abs group only).
    std::vector<double> blocking;
    double achieved_ratio = 0.0;
    int n_base = 0;
};

class TargetUnreachable : public std::runtime_error {
public:
    TargetUnreachable(double lo, double hi, WindowChoice closest);
    double lowest() const { return lo_; }
    double highest() const { return hi_; }
    /// Best effort: the bracket end nearest to the target.
    const WindowChoice& closest() const { return closest_; }

private:
    double lo_, hi_;
    WindowChoice closest_;
};

/// Searches N_base so that the group's analytic reservation proportion lands
/// within 0.01 of target_ratio, with N_i = clamp(round(N_base / alpha_i)).
/// For Abs the proportion is the reserved share of ABS periods, for Rel the
/// reserved share of RAN transmissions.
WindowChoice change_reservation_window(const std::vector<double>& weights, double target_ratio, Mechanism group,
                                       const Scenario& context);

struct AdaptResult {
    std::vector<double> weights;
    double p_rsv_sui = 0.0;
    /// Per class; zero for classes of the other group.
    std::vector<int> n_abs;
    std::vector<int> n_rel;
    bool fallback_used = false;
    bool infeasible = false;
    std::vector<int> failing_classes;
    std::vector<double> predicted_delays;
    std::vector<double> blocking;
    double abs_ratio = 0.0;
    double rel_ratio = 0.0;
};

AdaptResult adapt_parameters(const Scenario& sc);

/// Scenario carrying the adapted weights and windows.
Scenario apply(const Scenario& sc, const AdaptResult& r);

/// Re-solves the analytic model at the returned parameters and checks the
/// delay and blocking guarantees. Classes listed as failing are skipped.
bool audit(const Scenario& sc, const AdaptResult& r, std::vector<int>* offending = nullptr);

}  // namespace dsgarm::adapt
