#include "dsgarm/analytic/reservation.hpp"

#include <algorithm>
#include <numeric>

namespace dsgarm::analytic {

std::vector<double> selection_distribution(std::span<const double> idle) {
    double norm = 0.0;
    for (double s : idle) norm += std::max(0.0, s);
    if (!(norm > 0.0)) throw AllPeriodsReserved();
    std::vector<double> out(idle.size());
    for (std::size_t d = 0; d < idle.size(); ++d) out[d] = std::max(0.0, idle[d]) / norm;
    return out;
}

std::vector<double> selection_distribution(const OccupancyState& state, int k, int c_k) {
    std::vector<double> idle(c_k);
    for (int d = 0; d < c_k; ++d) {
        const int i = state.current_index + 1 + d;
        idle[d] = i < static_cast<int>(state.s.size()) ? state.idle_for(k, i) : 1.0;
    }
    return selection_distribution(idle);
}

namespace {

struct Group {
    int window;
    double p_has;
    int count = 0;
    int c = 0;
    std::vector<double> r;
};

}  // namespace

OccupancyResult occupancy_model(std::span<const int> windows, std::span<const double> p_has_rsv) {
    if (windows.size() != p_has_rsv.size()) throw std::invalid_argument("occupancy_model: size mismatch");
    const int m = static_cast<int>(windows.size());
    OccupancyResult out;
    if (m == 0) return out;

    std::vector<Group> groups;
    std::vector<int> group_of(m);
    for (int k = 0; k < m; ++k) {
        if (windows[k] < 1) throw std::invalid_argument("occupancy_model: window must be >= 1");
        auto it = std::find_if(groups.begin(), groups.end(), [&](const Group& g) {
            return g.window == windows[k] && g.p_has == p_has_rsv[k];
        });
        if (it == groups.end()) {
            groups.push_back(Group{windows[k], p_has_rsv[k], 0, 0, {}});
            it = std::prev(groups.end());
        }
        ++it->count;
        group_of[k] = static_cast<int>(it - groups.begin());
    }

    int c_max = 0;
    for (auto& g : groups) {
        g.c = g.window + m - 1;
        c_max = std::max(c_max, g.c);
    }
    const int last = c_max - 1;              // final current period
    const int length = last + c_max + 1;     // absolute periods 0..last+c_max

    // Memoryless start: the pending reservation is spread evenly over the
    // node's own right window of period 0.
    for (auto& g : groups) {
        g.r.assign(length, 0.0);
        for (int j = 1; j <= g.c; ++j) g.r[j] = g.p_has / g.c;
    }
    auto totals = [&] {
        std::vector<double> t(length, 0.0);
        for (const auto& g : groups)
            for (int i = 0; i < length; ++i) t[i] += g.count * g.r[i];
        return t;
    };

    std::vector<double> rsum = totals();
    std::vector<double> idle;
    for (int s = 1; s <= last; ++s) {
        std::vector<std::vector<double>> fired(groups.size());
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            const auto& g = groups[gi];
            const double fire = g.r[s];
            if (fire <= 0.0) continue;
            idle.assign(g.c, 0.0);
            double norm = 0.0;
            for (int d = 0; d < g.c; ++d) {
                const int i = s + 1 + d;
                idle[d] = std::clamp(1.0 - (rsum[i] - g.r[i]), 0.0, 1.0);
                norm += idle[d];
            }
            if (norm <= 0.0) continue;  // blocked: the mass cannot be placed
            fired[gi].resize(g.c);
            for (int d = 0; d < g.c; ++d) fired[gi][d] = fire * idle[d] / norm;
        }
        for (std::size_t gi = 0; gi < groups.size(); ++gi) {
            if (fired[gi].empty()) continue;
            for (int d = 0; d < groups[gi].c; ++d) groups[gi].r[s + 1 + d] += fired[gi][d];
        }
        rsum = totals();
    }

    out.c.resize(m);
    out.p_rsv.resize(m);
    out.reserved_by_others.resize(m);
    std::vector<std::vector<double>> g_rsv(groups.size()), g_others(groups.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& g = groups[gi];
        std::vector<double> s(g.c);
        g_others[gi].resize(g.c);
        for (int j = 1; j <= g.c; ++j) {
            const int i = last + j;
            const double others = std::clamp(rsum[i] - g.r[i], 0.0, 1.0);
            g_others[gi][j - 1] = others;
            s[j - 1] = 1.0 - others;
        }
        g_rsv[gi] = selection_distribution(s);
    }
    for (int k = 0; k < m; ++k) {
        const int gi = group_of[k];
        out.c[k] = groups[gi].c;
        out.p_rsv[k] = g_rsv[gi];
        out.reserved_by_others[k] = g_others[gi];
    }
    out.reserved_total.resize(c_max);
    for (int j = 1; j <= c_max; ++j) out.reserved_total[j - 1] = rsum[last + j];

    out.p_rsv_sum.assign(c_max, 0.0);
    for (int k = 0; k < m; ++k)
        for (std::size_t j = 0; j < out.p_rsv[k].size(); ++j) out.p_rsv_sum[j] += out.p_rsv[k][j];
    out.p_rsv_mean = out.p_rsv_sum;
    for (double& v : out.p_rsv_mean) v /= m;
    return out;
}

ReservationSteadyState steady_state(std::span<const double> p_rsv, double h_r, double p_cs_suc) {
    if (!(h_r > 0.0 && h_r <= 1.0)) throw std::invalid_argument("steady_state: h_r must lie in (0,1]");
    const int c = static_cast<int>(p_rsv.size());
    if (c == 0) throw std::invalid_argument("steady_state: empty selection distribution");

    // tail[i-1] = sum_{j >= i} P_RSV^j; sum of tails is the mean offset.
    std::vector<double> tail(c);
    double acc = 0.0;
    for (int i = c - 1; i >= 0; --i) {
        acc += p_rsv[i];
        tail[i] = acc;
    }
    const double mean_offset = std::accumulate(tail.begin(), tail.end(), 0.0);

    double lost = 0.0;  // expected periods spent in the non-reservation state per renewal
    if (h_r < 1.0) {
        if (!(p_cs_suc > 0.0)) throw DivergentChain();
        lost = (1.0 - h_r) / p_cs_suc;
    }
    const double denom = lost + mean_offset;

    ReservationSteadyState st;
    st.mean_offset = mean_offset;
    st.b.resize(c + 1);
    st.b[0] = lost / denom;
    for (int i = 1; i <= c; ++i) st.b[i] = tail[i - 1] / denom;
    st.p_ir = st.b[1];
    st.p_no_rsv = st.b[0];
    st.p_has_rsv = 1.0 - st.p_no_rsv;
    return st;
}

double total_reservation(std::span<const ReservationSteadyState> nodes) {
    double t = 0.0;
    for (const auto& n : nodes) t += n.p_ir;
    return t;
}

std::vector<std::vector<double>> occupied_count_table(std::span<const double> r) {
    const std::size_t n = r.size();
    std::vector<std::vector<double>> dist(n + 1);
    dist[0] = {1.0};
    for (std::size_t j = 1; j <= n; ++j) {
        const double q = r[j - 1];
        dist[j].assign(j + 1, 0.0);
        for (std::size_t d = 0; d <= j; ++d) {
            double v = 0.0;
            if (d >= 1) v += dist[j - 1][d - 1] * q;
            if (d <= j - 1) v += dist[j - 1][d] * (1.0 - q);
            dist[j][d] = v;
        }
    }
    return dist;
}

double blocking_probability(std::span<const double> r_first, int d) {
    if (d < 1) throw std::invalid_argument("blocking_probability: d must be >= 1");
    if (static_cast<int>(r_first.size()) < d) throw std::invalid_argument("blocking_probability: need d entries");
    // Only the all-occupied column of the recursion is needed: P^{(1,j),j}.
    double all = 1.0;
    for (int j = 0; j < d; ++j) all *= r_first[j];
    return all;
}

}  // namespace dsgarm::analytic
