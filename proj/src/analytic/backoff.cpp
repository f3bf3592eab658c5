#include "dsgarm/analytic/backoff.hpp"

#include <algorithm>
#include <cmath>

namespace dsgarm::analytic {

namespace {

int stage_window(const ContentionParams& c, int i) { return c.w0 << i; }

double mean_plus_one(const std::vector<double>& law) {
    double m = 0.0;
    for (std::size_t v = 0; v < law.size(); ++v) m += static_cast<double>(v) * law[v];
    return 1.0 + m;
}

}  // namespace

BackoffLaw uniform_backoff(const ContentionParams& c) {
    BackoffLaw law(c.g + 1);
    for (int i = 0; i <= c.g; ++i) {
        const int w = stage_window(c, i);
        law[i].assign(w, 1.0 / w);
    }
    return law;
}

BackoffLaw reserved_backoff(const ContentionParams& c, std::span<const double> reserved, int m_rel) {
    BackoffLaw law(c.g + 1);
    for (int i = 0; i <= c.g; ++i) {
        const int w = stage_window(c, i);
        const int span_len = w + std::max(0, m_rel);
        // count[u]: probability that u of the slots seen so far are unreserved,
        // kept for u < w only (the rest can no longer host a pick).
        std::vector<double> count(w, 0.0), next(w, 0.0);
        count[0] = 1.0;
        std::vector<double> values(span_len, 0.0);
        double total = 0.0;
        for (int j = 1; j <= span_len; ++j) {
            const double r = j - 1 < static_cast<int>(reserved.size()) ? std::clamp(reserved[j - 1], 0.0, 1.0) : 0.0;
            double below = 0.0;
            for (double x : count) below += x;
            // slot j becomes pick number u+1 for any u < w
            values[j - 1] = (1.0 - r) * below / w;
            total += values[j - 1];
            std::fill(next.begin(), next.end(), 0.0);
            for (int u = 0; u < w; ++u) {
                next[u] += count[u] * r;
                if (u + 1 < w) next[u + 1] += count[u] * (1.0 - r);
            }
            count.swap(next);
        }
        for (double& v : values) v /= total;
        law[i] = std::move(values);
    }
    return law;
}

double chain_tau(const BackoffLaw& p_bo, int g, double p) {
    double denom = 0.0;
    double pi = 1.0;
    for (int i = 0; i < g; ++i) {
        denom += (1.0 - p) * pi * mean_plus_one(p_bo[i]);
        pi *= p;
    }
    denom += pi * mean_plus_one(p_bo[g]);
    return 1.0 / denom;
}

BackoffSolution backoff_model(const BackoffInput& in) {
    if (!(in.p_rel_tot >= 0.0 && in.p_rel_tot < 1.0))
        throw std::invalid_argument("backoff_model: p_rel_tot must lie in [0,1)");
    if (static_cast<int>(in.p_bo.size()) != in.contention.g + 1)
        throw std::invalid_argument("backoff_model: one backoff law per stage required");

    BackoffSolution sol;
    sol.m_con = in.m_cs + in.m_rel * in.p_no_rsv;
    const double q = 1.0 - in.p_rel_tot;
    const double others = std::max(0.0, sol.m_con - 1.0);
    const int g = in.contention.g;

    auto failure = [&](double p) {
        const double tau_u = std::min(1.0, chain_tau(in.p_bo, g, p) / q);
        const double p_c = 1.0 - std::pow(1.0 - tau_u, others);
        return 1.0 - (1.0 - p_c) * (1.0 - in.p_e);
    };

    // failure(p) - p is strictly decreasing on [0, 1]: bisection.
    double lo = 0.0, hi = 1.0;
    int it = 0;
    for (; it < 200 && hi - lo > 1e-16; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (failure(mid) - mid > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double p = 0.5 * (lo + hi);
    sol.iterations = it;
    sol.residual = std::abs(failure(p) - p);
    if (sol.residual > 1e-9) throw NoConvergence("backoff_model: fixed point not reached", sol.residual);

    sol.p = p;
    // A counter law truncated under heavy reservation can ask for more than one
    // attempt per unreserved slot; the node then attempts in every one.
    sol.tau = std::min(chain_tau(in.p_bo, g, p), q);
    const double tau_u = sol.tau / q;
    sol.tau_unreserved = tau_u;
    sol.p_c = 1.0 - std::pow(1.0 - tau_u, others);
    sol.p = 1.0 - (1.0 - sol.p_c) * (1.0 - in.p_e);
    if (sol.m_con > 0.0) {
        sol.p_tr = 1.0 - std::pow(1.0 - tau_u, sol.m_con);
        sol.p_s = sol.p_tr > 0.0 ? sol.m_con * tau_u * std::pow(1.0 - tau_u, others) / sol.p_tr : 0.0;
        sol.p_s = std::min(sol.p_s, 1.0);
    }
    sol.u_bo = sol.p_tr > 0.0 ? (1.0 - sol.p_tr) / sol.p_tr : 0.0;
    return sol;
}

}  // namespace dsgarm::analytic
