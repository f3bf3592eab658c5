#include "dsgarm/analytic/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dsgarm::analytic {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

// Damped fixed point over a flat probability vector.
template <class F>
void iterate(std::vector<double>& x, F&& f, const SolveOptions& opt, int& iterations, double& residual,
             const char* what) {
    std::vector<double> trace;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        std::vector<double> fx = f(x);
        double r = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) r = std::max(r, std::abs(fx[i] - x[i]));
        trace.push_back(r);
        iterations = it;
        residual = r;
        if (r < opt.tolerance) {
            x = std::move(fx);
            return;
        }
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = (1.0 - opt.damping) * x[i] + opt.damping * fx[i];
    }
    throw NoConvergence(what, residual, std::move(trace));
}

std::vector<ReservationSteadyState> steady_states(const OccupancyResult& occ, double h_r, double p_cs_suc) {
    std::vector<ReservationSteadyState> st;
    st.reserve(occ.p_rsv.size());
    for (const auto& p : occ.p_rsv) st.push_back(steady_state(p, h_r, p_cs_suc));
    return st;
}

// Probability that virtual slot j ahead is held by some node's pending reservation.
std::vector<double> remaining_law(const std::vector<ReservationSteadyState>& st) {
    std::size_t len = 0;
    for (const auto& s : st) len = std::max(len, s.b.size() > 0 ? s.b.size() - 1 : 0);
    std::vector<double> r(len, 0.0);
    for (const auto& s : st)
        for (std::size_t j = 1; j < s.b.size(); ++j) r[j - 1] += s.b[j];
    for (double& v : r) v = clamp01(v);
    return r;
}

double initial_p_has(double perturb) { return std::clamp(1.0 + perturb, 0.01, 1.0); }

}  // namespace

AbsGroupSolution solve_abs_group(const std::vector<int>& windows, const ChannelParams& ch,
                                 const ContentionParams& ct, const SolveOptions& opt) {
    AbsGroupSolution sol;
    sol.windows = windows;
    const int m = static_cast<int>(windows.size());
    BackoffInput bi;
    bi.m_cs = m;
    bi.p_bo = uniform_backoff(ct);
    bi.contention = ct;
    bi.p_e = ch.p_e;
    sol.csma = backoff_model(bi);
    if (m == 0) return sol;
    const double h_r = ch.h_r();

    auto p_cs_of = [&](double p_abs) { return (1.0 - clamp01(p_abs)) * sol.csma.p_s * h_r / m; };

    // x = (p_has per node, p_cs_suc)
    std::vector<double> x(m + 1, initial_p_has(opt.perturb));
    {
        const auto occ = occupancy_model(windows, std::vector<double>(x.begin(), x.begin() + m));
        double p_abs = 0.0;
        for (const auto& p : occ.p_rsv) p_abs += steady_state(p, 1.0, 1.0).p_ir;
        x[m] = std::clamp(p_cs_of(p_abs) + opt.perturb, 1e-6, 1.0);
    }
    auto f = [&](const std::vector<double>& in) {
        const auto occ = occupancy_model(windows, std::vector<double>(in.begin(), in.begin() + m));
        const auto st = steady_states(occ, h_r, in[m]);
        std::vector<double> out(m + 1);
        double p_abs = 0.0;
        for (int k = 0; k < m; ++k) {
            out[k] = st[k].p_has_rsv;
            p_abs += st[k].p_ir;
        }
        out[m] = p_cs_of(p_abs);
        return out;
    };
    iterate(x, f, opt, sol.iterations, sol.residual, "absolute reservation fixed point did not converge");

    sol.occupancy = occupancy_model(windows, std::vector<double>(x.begin(), x.begin() + m));
    sol.nodes = steady_states(sol.occupancy, h_r, x[m]);
    sol.p_abs_tot = 0.0;
    for (const auto& s : sol.nodes) sol.p_abs_tot += s.p_ir;
    sol.p_cs_suc = p_cs_of(sol.p_abs_tot);
    return sol;
}

RanGroupSolution solve_ran_group(const std::vector<int>& rel_windows, int m_cs, const ChannelParams& ch,
                                 const ContentionParams& ct, const SolveOptions& opt) {
    RanGroupSolution sol;
    sol.windows = rel_windows;
    sol.m_cs = m_cs;
    const int m = static_cast<int>(rel_windows.size());
    const double h_r = ch.h_r();

    struct Pass {
        OccupancyResult occ;
        std::vector<ReservationSteadyState> st;
        double p_rel = 0.0;
        double p_no = 0.0;
        BackoffSolution bo;
    };
    auto evaluate = [&](const std::vector<double>& p_has, double p_cs) {
        Pass ps;
        if (m > 0) {
            ps.occ = occupancy_model(rel_windows, p_has);
            ps.st = steady_states(ps.occ, h_r, p_cs);
            for (const auto& s : ps.st) {
                ps.p_rel += s.p_ir;
                ps.p_no += s.p_no_rsv;
            }
            ps.p_no /= m;
        }
        ps.p_rel = std::min(ps.p_rel, 1.0 - 1e-12);
        BackoffInput bi;
        bi.m_cs = m_cs;
        bi.m_rel = m;
        bi.p_no_rsv = ps.p_no;
        bi.p_rel_tot = ps.p_rel;
        bi.p_bo = m > 0 ? reserved_backoff(ct, remaining_law(ps.st), m) : uniform_backoff(ct);
        bi.contention = ct;
        bi.p_e = ch.p_e;
        ps.bo = backoff_model(bi);
        return ps;
    };
    auto p_cs_of = [&](const Pass& ps) {
        if (ps.bo.m_con <= 0.0) return 0.0;
        return (1.0 - ps.p_rel) * ps.bo.p_tr * ps.bo.p_s * h_r / ps.bo.m_con;
    };

    std::vector<double> x(m + 1, initial_p_has(opt.perturb));
    if (m > 0) {
        // Seed p_cs_suc from the lossless pass.
        const Pass seed = evaluate(std::vector<double>(m, 1.0), 1.0);
        x[m] = p_cs_of(seed);
        if (h_r < 1.0) x[m] = std::clamp(x[m] + opt.perturb, 1e-6, 1.0);
        auto f = [&](const std::vector<double>& in) {
            const Pass ps = evaluate(std::vector<double>(in.begin(), in.begin() + m), in[m]);
            std::vector<double> out(m + 1);
            for (int k = 0; k < m; ++k) out[k] = ps.st[k].p_has_rsv;
            out[m] = p_cs_of(ps);
            return out;
        };
        iterate(x, f, opt, sol.iterations, sol.residual, "relative reservation fixed point did not converge");
    }
    const Pass fin = evaluate(std::vector<double>(x.begin(), x.begin() + m), x[m]);
    sol.occupancy = fin.occ;
    sol.nodes = fin.st;
    sol.p_rel_tot = fin.p_rel;
    sol.p_no_mean = fin.p_no;
    sol.backoff = fin.bo;
    sol.p_cs_suc = p_cs_of(fin);
    return sol;
}

void ran_metrics(MacRates& r, const RanGroupSolution& ran, const ChannelParams& ch, const ModelOptions& model) {
    const auto& d = ch.durations;
    const auto& bo = ran.backoff;
    const double p_rel = ran.p_rel_tot;
    const double p_tr = bo.m_con > 0.0 ? bo.p_tr : 0.0;
    r.p_ran_bs = p_rel + (1.0 - p_rel) * p_tr;
    r.p_cs_suc_rel = ran.p_cs_suc;
    r.t_ran_rel = d.t_suc_rsv;
    r.t_ran_cs = bo.p_s * d.t_suc_cs + (1.0 - bo.p_s) * d.t_fai_cs;
    const std::size_t m = ran.nodes.size();
    r.p_ran_rel_suc.assign(m, 0.0);
    r.p_bet.assign(m, {});
    if (!(r.p_ran_bs > 0.0)) {
        r.p_rel_rsv = 0.0;
        r.p_rel_cs = 1.0;
        r.t_ran_tot = 0.0;
        r.u_bo_ran = 0.0;
        r.p_ran_cs_suc = 0.0;
        return;
    }
    r.p_rel_rsv = p_rel / r.p_ran_bs;
    r.p_rel_cs = 1.0 - r.p_rel_rsv;
    r.u_bo_ran = (1.0 - r.p_ran_bs) / r.p_ran_bs;
    r.t_ran_tot = r.u_bo_ran + r.p_rel_rsv * r.t_ran_rel + r.p_rel_cs * r.t_ran_cs;

    const double ok = 1.0 - ch.p_e;
    const double cs_share = bo.m_con > 0.0 ? r.p_rel_cs * bo.p_s * ok / bo.m_con : 0.0;
    r.p_ran_cs_suc = cs_share;
    for (std::size_t k = 0; k < m; ++k) {
        const double p_no = ran.nodes[k].p_no_rsv;
        const double extra = model.rel_csma_double_factor ? p_no * p_no : p_no;
        r.p_ran_rel_suc[k] = ran.nodes[k].p_ir / r.p_ran_bs * ok + cs_share * extra;

        // Foreign busy slots between two reservations of node k.
        const double pir = ran.nodes[k].p_ir;
        const double q = pir < 1.0 ? clamp01((r.p_ran_bs - pir) / (1.0 - pir)) : 0.0;
        const auto& prsv = ran.occupancy.p_rsv[k];
        std::vector<double> bet(prsv.size() + 1, 0.0);
        std::vector<double> binom{1.0};
        for (std::size_t s = 1; s <= prsv.size(); ++s) {
            // binom holds Binomial(s-1, q)
            for (std::size_t z = 0; z < binom.size(); ++z) bet[z] += prsv[s - 1] * binom[z];
            std::vector<double> next(binom.size() + 1, 0.0);
            for (std::size_t z = 0; z < binom.size(); ++z) {
                next[z] += binom[z] * (1.0 - q);
                next[z + 1] += binom[z] * q;
            }
            binom.swap(next);
        }
        r.p_bet[k] = std::move(bet);
    }
}

void abs_metrics(MacRates& r, const AbsGroupSolution& abs, const ChannelParams& ch, int nominal) {
    const auto& d = ch.durations;
    const std::size_t m = abs.nodes.size();
    r.p_abs_tot = abs.p_abs_tot;
    r.p_cs_suc_abs = abs.p_cs_suc;
    r.p_abs_suc.assign(m, 0.0);
    if (m == 0) {
        r.t_abs_rsv = r.t_abs_cs = r.t_abs_tot = nominal;
        return;
    }
    const auto& cs = abs.csma;
    r.t_abs_rsv = std::max<double>(nominal, d.t_suc_rsv);
    r.t_abs_cs = std::max<double>(nominal, cs.u_bo + cs.p_s * d.t_suc_cs + (1.0 - cs.p_s) * d.t_fai_cs);
    r.t_abs_tot = r.p_abs_tot * r.t_abs_rsv + (1.0 - r.p_abs_tot) * r.t_abs_cs;
    const double ok = 1.0 - ch.p_e;
    for (std::size_t k = 0; k < m; ++k)
        r.p_abs_suc[k] = abs.nodes[k].p_ir * ok + (1.0 - r.p_abs_tot) * cs.p_s * ok / static_cast<double>(m);
}

void cycle_metrics(MacRates& r, int abs_periods, double cycle_slots) {
    r.n_abs = abs_periods;
    const double abs_time = abs_periods * r.t_abs_tot;
    r.t_cycle = std::max(cycle_slots, abs_time);
    r.n_ran = r.t_ran_tot > 0.0 ? (r.t_cycle - abs_time) / r.t_ran_tot : 0.0;
    const double units = r.n_abs + r.n_ran;
    r.p_ran = units > 0.0 ? r.n_ran / units : 0.0;
    r.t_all_tot = units > 0.0 ? r.t_cycle / units : r.t_cycle;
}

int blocking_quantity(const TrafficClass& tc, const Scenario& sc) {
    if (tc.blocking_quantity) return *tc.blocking_quantity;
    const int n_abs = sc.layout.abs_periods();
    if (n_abs <= 0) return 1;
    const double spacing_ms = static_cast<double>(sc.cycle_slots()) * sc.channel.slot_ms() / n_abs;
    return std::max(1, static_cast<int>(std::floor(sc.adapt.lambda * tc.l_min / spacing_ms)));
}

double pdf_range_ms(const Scenario& sc, const std::vector<NodeResult>& nodes) {
    double l = 0.0;
    for (const auto& tc : sc.traffic_classes)
        if (tc.real_time) l = std::max(l, tc.l_max);
    if (l > 0.0) return 4.0 * l;
    for (const auto& n : nodes)
        if (std::isfinite(n.delay_ms)) l = std::max(l, n.delay_ms);
    return l > 0.0 ? 4.0 * l : 1.0;
}

namespace {

struct Hist {
    std::vector<double> mass;
    double bin_ms;
    void add(double ms, double w) {
        if (w <= 0.0) return;
        std::size_t b = ms <= 0.0 ? 0 : static_cast<std::size_t>(ms / bin_ms);
        mass[std::min(b, mass.size() - 1)] += w;
    }
};

// Mixture over the number of reservation rounds needed for one delivery.
std::vector<double> rounds_mixture(const std::vector<double>& one, double p_e) {
    if (p_e <= 0.0) return one;
    const std::size_t n = one.size();
    std::vector<double> out(n, 0.0), cur = one;
    double w = 1.0 - p_e;
    for (int r = 1; r <= 200 && w > 1e-14; ++r) {
        for (std::size_t i = 0; i < n; ++i) out[i] += w * cur[i];
        std::vector<double> next(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (cur[i] == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) next[std::min(i + j, n - 1)] += cur[i] * one[j];
        }
        cur.swap(next);
        w *= p_e;
    }
    // Remaining rounds: beyond any sensible delay.
    double tot = 0.0;
    for (double v : out) tot += v;
    out[n - 1] += std::max(0.0, 1.0 - tot);
    return out;
}

}  // namespace

AnalyticSolution throughput_delay(const Scenario& sc, const MacRates& rates, const AbsGroupSolution& abs,
                                  const RanGroupSolution& ran) {
    AnalyticSolution out;
    out.rates = rates;
    out.abs = abs;
    out.ran = ran;
    const auto specs = node_specs(sc);
    const double slot_s = sc.channel.slot_us * 1e-6;
    const double cycle_s = rates.t_cycle * slot_s;
    const double bits = sc.channel.payload_bits();
    const double units = rates.n_abs + rates.n_ran;

    int ia = 0, ir = 0;
    for (const auto& ns : specs) {
        NodeResult n;
        n.node = ns.node;
        n.class_index = ns.class_index;
        n.mechanism = ns.mechanism;
        n.window = ns.window;
        double per_cycle = 0.0;
        if (ns.mechanism == Mechanism::Abs) {
            const auto& st = abs.nodes[ia];
            n.p_ir = st.p_ir;
            n.p_no_rsv = st.p_no_rsv;
            per_cycle = rates.n_abs * rates.p_abs_suc[ia];
            n.rsv_trans_ratio = st.p_ir;
            n.rsv_slot_ratio = rates.t_abs_tot > 0.0 ? st.p_ir * rates.t_abs_rsv / rates.t_abs_tot : 0.0;
            const int d = blocking_quantity(sc.traffic_classes[ns.class_index], sc);
            std::vector<double> r(d, 0.0);
            const auto& others = abs.occupancy.reserved_by_others[ia];
            for (int j = 0; j < d && j < static_cast<int>(others.size()); ++j) r[j] = others[j];
            n.p_blocking = blocking_probability(r, d);
            ++ia;
        } else if (ns.mechanism == Mechanism::Rel) {
            const auto& st = ran.nodes[ir];
            n.p_ir = st.p_ir;
            n.p_no_rsv = st.p_no_rsv;
            per_cycle = rates.n_ran * rates.p_ran_rel_suc[ir];
            if (rates.p_ran_bs > 0.0) n.rsv_trans_ratio = st.p_ir / rates.p_ran_bs;
            if (rates.t_ran_tot > 0.0) n.rsv_slot_ratio = n.rsv_trans_ratio * rates.t_ran_rel / rates.t_ran_tot;
            ++ir;
        } else {
            n.p_no_rsv = 1.0;
            per_cycle = rates.n_ran * rates.p_ran_cs_suc;
        }
        n.p_st = units > 0.0 ? per_cycle / units : 0.0;
        n.throughput_bps = per_cycle * bits / cycle_s;
        n.delay_ms = per_cycle > 0.0 ? cycle_s * 1e3 / per_cycle : std::numeric_limits<double>::infinity();
        out.nodes.push_back(n);
    }

    // Delay PDFs.
    const double range = pdf_range_ms(sc, out.nodes);
    const std::size_t bins = static_cast<std::size_t>(std::ceil(range / out.pdf_bin_ms));
    const double slot_ms = sc.channel.slot_ms();
    const double ran_time = rates.n_ran * rates.t_ran_tot;
    const double f_ran = rates.t_cycle > 0.0 ? ran_time / rates.t_cycle : 0.0;
    const double gap = rates.t_cycle - rates.n_abs * rates.t_abs_tot;
    const double t_busy = rates.p_rel_rsv * rates.t_ran_rel + rates.p_rel_cs * rates.t_ran_cs;
    const int n_abs = static_cast<int>(rates.n_abs);

    std::vector<std::pair<std::vector<double>, std::vector<double>>> memo;
    auto mixture = [&](const std::vector<double>& one) {
        for (const auto& [in, res] : memo)
            if (in == one) return res;
        memo.emplace_back(one, rounds_mixture(one, sc.channel.p_e));
        return memo.back().second;
    };
    std::vector<std::vector<double>> node_pdf(out.nodes.size());
    ia = ir = 0;
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        const auto& n = out.nodes[i];
        Hist h{std::vector<double>(bins, 0.0), out.pdf_bin_ms};
        if (n.mechanism == Mechanism::Abs && n_abs > 0) {
            const auto& prsv = abs.occupancy.p_rsv[ia++];
            for (std::size_t s = 1; s <= prsv.size(); ++s) {
                for (int p0 = 0; p0 < n_abs; ++p0) {
                    const int wraps = (p0 + static_cast<int>(s)) / n_abs;
                    const double t = s * rates.t_abs_tot + wraps * gap;
                    h.add(t * slot_ms, prsv[s - 1] / n_abs);
                }
            }
            h.mass = mixture(h.mass);
        } else if (n.mechanism == Mechanism::Rel && f_ran > 0.0) {
            const auto& bet_src = ran.occupancy.p_rsv[ir];
            const double pir = ran.nodes[ir].p_ir;
            const double q = pir < 1.0 ? clamp01((rates.p_ran_bs - pir) / (1.0 - pir)) : 0.0;
            ++ir;
            std::vector<double> binom{1.0};
            for (std::size_t s = 1; s <= bet_src.size(); ++s) {
                for (std::size_t z = 0; z < binom.size(); ++z) {
                    const double t = z * t_busy + (static_cast<double>(s) - 1.0 - z) + rates.t_ran_rel;
                    h.add(t * slot_ms / f_ran, bet_src[s - 1] * binom[z]);
                }
                std::vector<double> next(binom.size() + 1, 0.0);
                for (std::size_t z = 0; z < binom.size(); ++z) {
                    next[z] += binom[z] * (1.0 - q);
                    next[z + 1] += binom[z] * q;
                }
                binom.swap(next);
            }
            h.mass = mixture(h.mass);
        } else if (n.mechanism == Mechanism::Csma && rates.n_ran > 0.0 && rates.p_ran_cs_suc > 0.0) {
            const double unit_ms = rates.t_cycle / rates.n_ran * slot_ms;
            const double p = rates.p_ran_cs_suc;
            double left = 1.0, w = p;
            for (int k = 1; left > 1e-14; ++k) {
                const double t = k * unit_ms;
                if (t >= range) break;
                h.add(t, w);
                left -= w;
                w *= 1.0 - p;
            }
            h.mass.back() += std::max(0.0, left);
        } else {
            h.mass.back() = 1.0;
            if (n.mechanism == Mechanism::Abs) ++ia;
            if (n.mechanism == Mechanism::Rel) ++ir;
        }
        double tot = 0.0;
        for (double v : h.mass) tot += v;
        if (tot > 0.0)
            for (double& v : h.mass) v /= tot;
        node_pdf[i] = std::move(h.mass);
    }

    for (std::size_t c = 0; c < sc.traffic_classes.size(); ++c) {
        ClassResult cr;
        cr.class_id = sc.traffic_classes[c].id;
        cr.mechanism = sc.traffic_classes[c].mechanism;
        cr.delay_pdf.assign(bins, 0.0);
        for (std::size_t i = 0; i < out.nodes.size(); ++i) {
            const auto& n = out.nodes[i];
            if (n.class_index != static_cast<int>(c)) continue;
            ++cr.nodes;
            cr.throughput_bps += n.throughput_bps;
            cr.delay_ms += n.delay_ms;
            cr.rsv_slot_ratio += n.rsv_slot_ratio;
            cr.rsv_trans_ratio += n.rsv_trans_ratio;
            cr.p_blocking += n.p_blocking;
            for (std::size_t b = 0; b < bins; ++b) cr.delay_pdf[b] += node_pdf[i][b];
        }
        if (cr.nodes > 0) {
            cr.delay_ms /= cr.nodes;
            cr.p_blocking /= cr.nodes;
            for (double& v : cr.delay_pdf) v /= cr.nodes;
        }
        out.classes.push_back(std::move(cr));
    }
    return out;
}

AnalyticSolution solve_network(const Scenario& sc, const SolveOptions& opt) {
    std::vector<int> abs_w, rel_w;
    int m_cs = 0;
    for (const auto& n : node_specs(sc)) {
        if (n.mechanism == Mechanism::Abs) abs_w.push_back(n.window);
        else if (n.mechanism == Mechanism::Rel) rel_w.push_back(n.window);
        else ++m_cs;
    }
    const auto abs = solve_abs_group(abs_w, sc.channel, sc.contention, opt);
    const auto ran = solve_ran_group(rel_w, m_cs, sc.channel, sc.contention, opt);
    MacRates rates;
    abs_metrics(rates, abs, sc.channel, sc.period_slots());
    ran_metrics(rates, ran, sc.channel, sc.model);
    cycle_metrics(rates, sc.layout.abs_periods(), static_cast<double>(sc.cycle_slots()));
    auto sol = throughput_delay(sc, rates, abs, ran);
    sol.iterations = std::max(abs.iterations, ran.iterations);
    sol.residual = std::max(abs.residual, ran.residual);
    return sol;
}

}  // namespace dsgarm::analytic
